use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Point2, Rect};
use crate::raster::Raster;

/// 8-bit greyscale image stored as binary PGM (`P5`). Row 0 is the top of
/// the image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreyImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.into(),
    }
}

impl GreyImage {
    /// Render occupancy probabilities: 0 is certainly occupied (black) and
    /// 255 certainly free. The top row is the cell row at the window's
    /// largest y.
    pub fn from_occupancy(r: &Raster) -> Self {
        let (nx, ny) = (r.grid.nx(), r.grid.ny());
        let mut pixels = Vec::with_capacity(r.values.len());
        for j in (0..ny).rev() {
            for i in 0..nx {
                let v = r.get(i, j).clamp(0.0, 1.0);
                pixels.push((255.0 * (1.0 - v)).round() as u8);
            }
        }
        GreyImage {
            width: nx,
            height: ny,
            pixels,
        }
    }

    /// Occupancy probabilities at the pixel levels of this image.
    pub fn to_occupancy(&self, grid: GridSpec) -> Result<Raster> {
        if grid.nx() != self.width || grid.ny() != self.height {
            return Err(Error::GridMismatch(format!(
                "image is {}x{}, grid is {}x{}",
                self.width,
                self.height,
                grid.nx(),
                grid.ny()
            )));
        }
        let mut values = vec![0.0; grid.len()];
        for (k, &px) in self.pixels.iter().enumerate() {
            let (i, row) = (k as u32 % self.width, k as u32 / self.width);
            values[grid.linear((i, self.height - 1 - row))] = 1.0 - px as f64 / 255.0;
        }
        Raster::new(grid, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated PGM header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P5" {
            return Err(bad("not a binary PGM"));
        }
        let num = |s: String| s.parse::<u32>().map_err(|_| bad(format!("bad PGM header field {s:?}")));
        let width = num(token()?)?;
        let height = num(token()?)?;
        if num(token()?)? != 255 {
            return Err(bad("only 8-bit PGM is supported"));
        }
        let start = pos + 1;
        let n = width as usize * height as usize;
        if bytes.len() != start + n {
            return Err(bad(format!("expected {n} pixels, found {}", bytes.len().saturating_sub(start))));
        }
        Ok(GreyImage {
            width,
            height,
            pixels: bytes[start..].to_vec(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        GreyImage::from_bytes(&std::fs::read(path)?)
    }
}

/// Text file stored next to a raster image describing its grid and what it
/// was computed from, as `key=value` lines.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterSidecar {
    pub grid: GridSpec,
    /// What the pixels mean, e.g. `p_black`.
    pub quantity: String,
    pub samples: u64,
    pub chains: u64,
}

impl RasterSidecar {
    pub fn to_text(&self) -> String {
        let w = &self.grid.window;
        let mut s = String::new();
        writeln!(s, "quantity={}", self.quantity).unwrap();
        writeln!(s, "min_x={}\nmin_y={}\nmax_x={}\nmax_y={}", w.min.x, w.min.y, w.max.x, w.max.y).unwrap();
        writeln!(s, "cell_size={}", self.grid.cell_size).unwrap();
        writeln!(s, "width={}\nheight={}", self.grid.nx(), self.grid.ny()).unwrap();
        writeln!(s, "samples={}\nchains={}", self.samples, self.chains).unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = std::collections::HashMap::new();
        for (i, l) in text.lines().enumerate() {
            if l.trim().is_empty() {
                continue;
            }
            let (k, v) = l.split_once('=').ok_or(Error::Parse {
                line: i + 1,
                msg: "expected key=value".into(),
            })?;
            kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        fn get<T: std::str::FromStr>(kv: &std::collections::HashMap<String, (usize, String)>, k: &str) -> Result<T> {
            let (line, v) = kv.get(k).ok_or_else(|| bad(format!("sidecar lacks {k}")))?;
            v.parse().map_err(|_| Error::Parse {
                line: *line,
                msg: format!("bad {k} {v:?}"),
            })
        }
        let window = Rect::new(
            Point2::new(get(&kv, "min_x")?, get(&kv, "min_y")?),
            Point2::new(get(&kv, "max_x")?, get(&kv, "max_y")?),
        )?;
        let grid = GridSpec::new(window, get(&kv, "cell_size")?)?;
        if grid.nx() != get::<u32>(&kv, "width")? || grid.ny() != get::<u32>(&kv, "height")? {
            return Err(bad("sidecar size disagrees with its grid"));
        }
        Ok(RasterSidecar {
            grid,
            quantity: get(&kv, "quantity")?,
            samples: get(&kv, "samples")?,
            chains: get(&kv, "chains")?,
        })
    }
}

fn with_ext(stem: &Path, ext: &str) -> std::path::PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

/// Write `raster` as `<stem>.pgm` with a `<stem>.txt` sidecar.
pub fn write_raster(stem: &Path, raster: &Raster, sidecar: &RasterSidecar) -> Result<()> {
    if sidecar.grid != raster.grid {
        return Err(Error::GridMismatch("sidecar grid differs from the raster".into()));
    }
    GreyImage::from_occupancy(raster).write(&with_ext(stem, "pgm"))?;
    std::fs::write(with_ext(stem, "txt"), sidecar.to_text())?;
    Ok(())
}

/// Read a raster written by [`write_raster`], at 8-bit precision.
pub fn read_raster(stem: &Path) -> Result<(Raster, RasterSidecar)> {
    let sidecar = RasterSidecar::parse(&std::fs::read_to_string(with_ext(stem, "txt"))?)?;
    let img = GreyImage::read(&with_ext(stem, "pgm"))?;
    Ok((img.to_occupancy(sidecar.grid)?, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(Rect::new(Point2::new(-1.0, 2.0), Point2::new(1.0, 3.0)).unwrap(), 0.25).unwrap()
    }

    #[test]
    fn levels_and_orientation() {
        let g = grid();
        let mut r = Raster::filled(g, 0.5);
        r.values[g.linear((0, 0))] = 1.0;
        r.values[g.linear((g.nx() - 1, g.ny() - 1))] = 0.0;
        let img = GreyImage::from_occupancy(&r);
        assert_eq!((img.width, img.height), (8, 4));
        // Bottom-left cell is the first pixel of the last row.
        assert_eq!(img.pixels[(3 * 8) as usize], 0);
        assert_eq!(img.pixels[7], 255);
        assert_eq!(img.pixels[1], 128);
    }

    #[test]
    fn bytes_round_trip() {
        let img = GreyImage {
            width: 3,
            height: 2,
            pixels: vec![0, 1, 2, 253, 254, 255],
        };
        assert_eq!(GreyImage::from_bytes(&img.to_bytes()).unwrap(), img);
        let mut commented = b"P5 # made by hand\n3 2\n255\n".to_vec();
        commented.extend_from_slice(&img.pixels);
        assert_eq!(GreyImage::from_bytes(&commented).unwrap(), img);
        assert!(GreyImage::from_bytes(b"P2\n1 1\n255\n0").is_err());
        assert!(GreyImage::from_bytes(b"P5\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let s = RasterSidecar {
            grid: grid(),
            quantity: "p_black".into(),
            samples: 1234,
            chains: 2,
        };
        assert_eq!(RasterSidecar::parse(&s.to_text()).unwrap(), s);
        assert!(RasterSidecar::parse("quantity=x\n").is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = std::env::temp_dir().join(format!("polymap-pgm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let g = grid();
        let r = Raster::new(g, (0..g.len()).map(|k| k as f64 / 31.0).collect()).unwrap();
        let side = RasterSidecar {
            grid: g,
            quantity: "p_black".into(),
            samples: 10,
            chains: 1,
        };
        write_raster(&dir.join("r.black"), &r, &side).unwrap();
        assert!(dir.join("r.black.pgm").exists());
        let (back, s2) = read_raster(&dir.join("r.black")).unwrap();
        assert_eq!(s2, side);
        for (a, b) in r.values.iter().zip(&back.values) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn quantized_images_are_fixed_points(px in proptest::collection::vec(any::<u8>(), 32)) {
            let img = GreyImage { width: 8, height: 4, pixels: px };
            let r = img.to_occupancy(grid()).unwrap();
            prop_assert_eq!(GreyImage::from_occupancy(&r), img);
        }
    }
}
