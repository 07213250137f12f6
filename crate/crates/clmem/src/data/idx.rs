//! IDX binary loader (the MNIST distribution format): big-endian u32
//! header, unsigned byte payload. Files ending in `.gz` are decompressed
//! transparently.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::bufread::GzDecoder;

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Loads an image/label IDX pair into a [`Dataset`].
///
/// Pixels are scaled to `[0, 1]` by `/255` and flattened row-major; the
/// sample index is the record position. Class count is `max label + 1`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let mut images = open_maybe_gz(images_path)?;
    let magic = read_u32_be(&mut images, images_path, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(
            images_path,
            format!("bad magic 0x{magic:08x} at byte 0, expected 0x{IMAGES_MAGIC:08x}"),
        ));
    }
    let count = read_u32_be(&mut images, images_path, 4)? as usize;
    let rows = read_u32_be(&mut images, images_path, 8)? as usize;
    let cols = read_u32_be(&mut images, images_path, 12)? as usize;
    let pixels_per_image = rows * cols;
    let mut pixel_data = vec![0u8; count * pixels_per_image];
    read_exact_at(&mut images, &mut pixel_data, images_path, 16)?;

    let mut labels = open_maybe_gz(labels_path)?;
    let magic = read_u32_be(&mut labels, labels_path, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(
            labels_path,
            format!("bad magic 0x{magic:08x} at byte 0, expected 0x{LABELS_MAGIC:08x}"),
        ));
    }
    let label_count = read_u32_be(&mut labels, labels_path, 4)? as usize;
    if label_count != count {
        return Err(Error::format(
            labels_path,
            format!("{label_count} labels but {count} images"),
        ));
    }
    let mut label_data = vec![0u8; count];
    read_exact_at(&mut labels, &mut label_data, labels_path, 8)?;

    let samples: Vec<Sample> = (0..count)
        .map(|i| Sample {
            features: pixel_data[i * pixels_per_image..(i + 1) * pixels_per_image]
                .iter()
                .map(|&b| b as f64 / 255.0)
                .collect(),
            label: label_data[i] as usize,
            index: i,
        })
        .collect();
    let num_classes = label_data.iter().map(|&l| l as usize).max().unwrap_or(0) + 1;
    Dataset::new(samples, num_classes)
}

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path)
        .map_err(|e| Error::format(path, format!("cannot open: {e}")))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(GzDecoder::new(reader)))
    } else {
        Ok(Box::new(reader))
    }
}

fn read_u32_be(reader: &mut impl Read, path: &Path, offset: usize) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|e| Error::format(path, format!("truncated at byte {offset}: {e}")))?;
    Ok(u32::from_be_bytes(buf))
}

fn read_exact_at(reader: &mut impl Read, buf: &mut [u8], path: &Path, offset: usize) -> Result<()> {
    reader
        .read_exact(buf)
        .map_err(|e| Error::format(path, format!("truncated in payload starting at byte {offset}: {e}")))
}
