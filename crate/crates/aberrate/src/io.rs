//! File formats at the harness boundary: PNG images and label maps, NPY
//! probability tensors, and CSV/PNG exports of PSF and MTF data.
//!
//! Conventions, chosen once and enforced everywhere:
//! * images are PNG, 8- or 16-bit, gray or RGB, normalized to [0, 1] on
//!   load by the full integer range;
//! * label maps are single-channel PNG (8- or 16-bit), one class id per
//!   pixel, never RGB;
//! * probability maps are NPY (`<f4` or `<f8`, C order) with shape
//!   (classes, height, width), the usual ML export layout, transposed to
//!   (height, width, classes) internally;
//! * the PSF PNG export is 16-bit gray mapping six decades of log
//!   intensity: `v = clamp(1 + log10(p / p_max) / 6, 0, 1) * 65535`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Read, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use ndarray::{Array2, Array3, ArrayView2};
use ndarray_npy::{ReadNpyExt, WriteNpyExt};

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::optics::{MtfCurve, Psf};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::io(path, source)
}

/// Load a PNG as a normalized image. Gray maps to one channel, RGB to
/// three; an alpha channel is rejected rather than silently dropped.
pub fn load_image_png(path: &Path) -> Result<Image> {
    let dynamic = image::open(path)
        .map_err(|e| Error::data(format!("cannot decode {}: {e}", path.display())))?;
    let data = match dynamic {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 1), |(r, c, _)| {
                buf.get_pixel(c as u32, r as u32).0[0] as f64 / 255.0
            })
        }
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 1), |(r, c, _)| {
                buf.get_pixel(c as u32, r as u32).0[0] as f64 / 65535.0
            })
        }
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 3), |(r, c, k)| {
                buf.get_pixel(c as u32, r as u32).0[k] as f64 / 255.0
            })
        }
        DynamicImage::ImageRgb16(buf) => {
            let (w, h) = buf.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 3), |(r, c, k)| {
                buf.get_pixel(c as u32, r as u32).0[k] as f64 / 65535.0
            })
        }
        other => {
            return Err(Error::data(format!(
                "{}: unsupported pixel layout {:?}; use gray or RGB without alpha",
                path.display(),
                other.color()
            )))
        }
    };
    Image::new(data)
}

/// Output bit depth for PNG image writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PngDepth {
    Eight,
    Sixteen,
}

/// Write a normalized image as PNG at the requested depth. One channel
/// becomes gray, three become RGB.
pub fn save_image_png(image: &Image, path: &Path, depth: PngDepth) -> Result<()> {
    let (h, w, c) = image.data().dim();
    if c != 1 && c != 3 {
        return Err(Error::data(format!(
            "PNG export needs 1 or 3 channels, image has {c}"
        )));
    }
    let save = |img: DynamicImage| {
        img.save(path)
            .map_err(|e| Error::data(format!("cannot encode {}: {e}", path.display())))
    };
    let quant8 = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    let quant16 = |v: f64| (v * 65535.0).round().clamp(0.0, 65535.0) as u16;
    match (c, depth) {
        (1, PngDepth::Eight) => {
            let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
                Luma([quant8(image.data()[[y as usize, x as usize, 0]])])
            });
            save(DynamicImage::ImageLuma8(buf))
        }
        (1, PngDepth::Sixteen) => {
            let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
                Luma([quant16(image.data()[[y as usize, x as usize, 0]])])
            });
            save(DynamicImage::ImageLuma16(buf))
        }
        (_, PngDepth::Eight) => {
            let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
                let px = |k| quant8(image.data()[[y as usize, x as usize, k]]);
                Rgb([px(0), px(1), px(2)])
            });
            save(DynamicImage::ImageRgb8(buf))
        }
        (_, PngDepth::Sixteen) => {
            let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
                let px = |k| quant16(image.data()[[y as usize, x as usize, k]]);
                Rgb([px(0), px(1), px(2)])
            });
            save(DynamicImage::ImageRgb16(buf))
        }
    }
}

/// Load a single-channel PNG of class ids.
pub fn load_label_png(path: &Path) -> Result<Array2<u16>> {
    let dynamic = image::open(path)
        .map_err(|e| Error::data(format!("cannot decode {}: {e}", path.display())))?;
    match dynamic {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Ok(Array2::from_shape_fn((h as usize, w as usize), |(r, c)| {
                buf.get_pixel(c as u32, r as u32).0[0] as u16
            }))
        }
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            Ok(Array2::from_shape_fn((h as usize, w as usize), |(r, c)| {
                buf.get_pixel(c as u32, r as u32).0[0]
            }))
        }
        other => Err(Error::data(format!(
            "{}: label maps must be single-channel, got {:?}",
            path.display(),
            other.color()
        ))),
    }
}

/// Write a label map as single-channel PNG: 8-bit when every id fits,
/// 16-bit otherwise.
pub fn save_label_png(labels: &ArrayView2<u16>, path: &Path) -> Result<()> {
    let (h, w) = labels.dim();
    let save = |img: DynamicImage| {
        img.save(path)
            .map_err(|e| Error::data(format!("cannot encode {}: {e}", path.display())))
    };
    if labels.iter().all(|&v| v <= u8::MAX as u16) {
        let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
            Luma([labels[[y as usize, x as usize]] as u8])
        });
        save(DynamicImage::ImageLuma8(buf))
    } else {
        let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
            Luma([labels[[y as usize, x as usize]]])
        });
        save(DynamicImage::ImageLuma16(buf))
    }
}

/// Load a probability tensor stored as NPY (classes, height, width) in
/// `<f4` or `<f8`; returns (height, width, classes) in standard layout.
pub fn load_probability_npy(path: &Path) -> Result<Array3<f64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    let chw: Array3<f64> = match Array3::<f64>::read_npy(Cursor::new(&bytes)) {
        Ok(a) => a,
        Err(_) => Array3::<f32>::read_npy(Cursor::new(&bytes))
            .map_err(|e| {
                Error::data(format!(
                    "{}: not a 3-d float NPY (f4/f8): {e}",
                    path.display()
                ))
            })?
            .mapv(f64::from),
    };
    Ok(chw
        .permuted_axes([1, 2, 0])
        .as_standard_layout()
        .into_owned())
}

/// Write a (height, width, classes) probability tensor as NPY `<f8` with
/// shape (classes, height, width).
pub fn save_probability_npy(probabilities: &Array3<f64>, path: &Path) -> Result<()> {
    let chw = probabilities
        .view()
        .permuted_axes([2, 0, 1])
        .as_standard_layout()
        .into_owned();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    chw.write_npy(BufWriter::new(file))
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))
}

/// Read a 2-d NPY of floats (`<f4` or `<f8`).
pub fn load_array2_npy(path: &Path) -> Result<Array2<f64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    match Array2::<f64>::read_npy(Cursor::new(&bytes)) {
        Ok(a) => Ok(a),
        Err(_) => Array2::<f32>::read_npy(Cursor::new(&bytes))
            .map(|a| a.mapv(f64::from))
            .map_err(|e| {
                Error::data(format!(
                    "{}: not a 2-d float NPY (f4/f8): {e}",
                    path.display()
                ))
            }),
    }
}

/// Write a 2-d array as NPY `<f8`.
pub fn save_array2_npy(data: &ArrayView2<f64>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    data.write_npy(BufWriter::new(file))
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))
}

/// Export a PSF as a 16-bit gray PNG over six decades of log intensity:
/// `pixel = clamp(1 + log10(p / p_max) / 6, 0, 1) * 65535`. Zeros map to
/// black.
pub fn psf_to_png(psf: &Psf, path: &Path) -> Result<()> {
    let samples = psf.samples();
    let peak = samples.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::numeric("PSF has no positive samples to scale"));
    }
    let (h, w) = samples.dim();
    let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let p = samples[[y as usize, x as usize]];
        let v = if p > 0.0 {
            (1.0 + (p / peak).log10() / 6.0).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Luma([(v * 65535.0).round() as u16])
    });
    DynamicImage::ImageLuma16(buf)
        .save(path)
        .map_err(|e| Error::data(format!("cannot encode {}: {e}", path.display())))
}

/// Export a PSF grid as CSV rows `x_um,y_um,intensity` with coordinates
/// centered on the peak sample.
pub fn psf_to_csv(psf: &Psf, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let center = psf.center() as isize;
    let pitch = psf.pitch_um();
    let write = |out: &mut BufWriter<File>, line: &str| {
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| io_err(path, e))
    };
    write(&mut out, "x_um,y_um,intensity")?;
    for ((r, c), &v) in psf.samples().indexed_iter() {
        let x = (c as isize - center) as f64 * pitch;
        let y = (r as isize - center) as f64 * pitch;
        write(&mut out, &format!("{x},{y},{v}"))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Export an MTF curve as CSV rows `frequency_cpp,value`.
pub fn mtf_to_csv(curve: &MtfCurve, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(b"frequency_cpp,value\n")
        .map_err(|e| io_err(path, e))?;
    for (f, v) in curve.frequencies_cpp().iter().zip(curve.values()) {
        out.write_all(format!("{f},{v}\n").as_bytes())
            .map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Read a whole file as a string with path context on failure.
pub fn read_to_string(path: &Path) -> Result<String> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut text = String::new();
    BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|e| io_err(path, e))?;
    Ok(text)
}

/// Write a string to a file with path context on failure.
pub fn write_string(path: &Path, text: &str) -> Result<()> {
    let mut file = File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}
