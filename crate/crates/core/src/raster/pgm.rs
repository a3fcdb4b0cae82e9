use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use super::GrayImage;
use crate::error::{Error, Result};

/// Writes a binary (P5) PGM.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            img.data(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::L8,
        )?;
    Ok(())
}

/// Reads an 8-bit grayscale PNM file.
pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let reader = ImageReader::with_format(BufReader::new(File::open(path)?), ImageFormat::Pnm);
    let decoded = reader.decode()?;
    let luma = match decoded {
        image::DynamicImage::ImageLuma8(l) => l,
        other => {
            return Err(Error::InvalidImage(format!(
                "{}: expected 8-bit grayscale, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    let (w, h) = (luma.width() as usize, luma.height() as usize);
    GrayImage::new(w, h, luma.into_raw())
}
