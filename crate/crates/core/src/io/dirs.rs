use std::fs;
use std::path::{Path, PathBuf};

use super::{read_graph, read_json, read_raster, write_graph, write_json, write_raster};
use crate::error::{Error, Result};
use crate::sampling::{CropSample, TargetLabels};
use crate::worldgen::{World, WorldSpec};

/// Stores a world as aerial.png, lane.pgm, gt.json and spec.json.
pub fn write_world(dir: &Path, world: &World) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_raster(&dir.join("aerial.png"), &world.aerial)?;
    write_raster(&dir.join("lane.pgm"), &world.lane_isdf)?;
    write_graph(&dir.join("gt.json"), &world.gt)?;
    write_json(&dir.join("spec.json"), &world.spec)
}

pub fn read_world(dir: &Path) -> Result<World> {
    let spec: WorldSpec = read_json(&dir.join("spec.json"))?;
    World::from_parts(
        spec,
        read_graph(&dir.join("gt.json"))?,
        read_raster(&dir.join("aerial.png"))?,
        read_raster(&dir.join("lane.pgm"))?,
    )
}

/// Stores one crop. Raster values are kept at 8 bits, so quantize the crop
/// first if labels computed from it must stay valid after reading back.
pub fn write_crop(dir: &Path, crop: &CropSample, labels: Option<&TargetLabels<f64>>) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_raster(&dir.join("image.png"), &crop.image)?;
    write_raster(&dir.join("lane.pgm"), &crop.lane_mask)?;
    write_raster(&dir.join("ego.pgm"), &crop.ego_mask)?;
    write_json(&dir.join("pose.json"), &crop.pose)?;
    write_graph(&dir.join("gt.json"), &crop.gt_successor)?;
    if let Some(l) = labels {
        write_json(&dir.join("labels.json"), l)?;
    }
    Ok(())
}

pub fn read_crop(dir: &Path) -> Result<(CropSample, Option<TargetLabels<f64>>)> {
    let crop = CropSample {
        image: read_raster(&dir.join("image.png"))?,
        lane_mask: read_raster(&dir.join("lane.pgm"))?,
        ego_mask: read_raster(&dir.join("ego.pgm"))?,
        pose: read_json(&dir.join("pose.json"))?,
        gt_successor: read_graph(&dir.join("gt.json"))?,
    };
    crop.validate()?;
    let lp = dir.join("labels.json");
    let labels = if lp.exists() {
        Some(read_json(&lp)?)
    } else {
        None
    };
    Ok((crop, labels))
}

fn sample_dir(root: &Path, k: usize) -> PathBuf {
    root.join(format!("sample_{k:05}"))
}

/// One `sample_NNNNN` subdirectory per crop.
pub fn write_dataset(
    root: &Path,
    crops: &[CropSample],
    labels: Option<&[TargetLabels<f64>]>,
) -> Result<()> {
    if labels.is_some_and(|l| l.len() != crops.len()) {
        return Err(Error::DimensionMismatch(
            "one label set per crop expected".into(),
        ));
    }
    for (k, c) in crops.iter().enumerate() {
        write_crop(&sample_dir(root, k), c, labels.map(|l| &l[k]))?;
    }
    Ok(())
}

/// Reads every subdirectory of `root` in name order.
pub fn read_dataset(root: &Path) -> Result<Vec<(CropSample, Option<TargetLabels<f64>>)>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no samples under {}",
            root.display()
        )));
    }
    dirs.iter().map(|d| read_crop(d)).collect()
}
