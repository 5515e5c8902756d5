//! Pixel-center rasterization straight to RLE.

/// Inclusive pixel-index box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBox {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl PixelBox {
    pub fn union(&self, other: &PixelBox) -> PixelBox {
        PixelBox {
            min_x: self.min_x.min(other.min_x),
            max_x: self.max_x.max(other.max_x),
            min_y: self.min_y.min(other.min_y),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn inside(&self, width: u32, height: u32) -> bool {
        self.min_x >= 0.0
            && self.min_y >= 0.0
            && self.max_x <= f64::from(width) - 1.0
            && self.max_y <= f64::from(height) - 1.0
    }
}

/// Encode the set of pixel centers inside `bbox` (clipped to the image)
/// for which `inside(x, y)` holds.
pub fn rasterize(width: u32, height: u32, bbox: PixelBox, inside: impl Fn(f64, f64) -> bool) -> Vec<u32> {
    let total = u64::from(width) * u64::from(height);
    let x0 = bbox.min_x.floor().max(0.0) as u32;
    let y0 = bbox.min_y.floor().max(0.0) as u32;
    let x1 = (bbox.max_x.ceil().max(-1.0) as i64).min(i64::from(width) - 1);
    let y1 = (bbox.max_y.ceil().max(-1.0) as i64).min(i64::from(height) - 1);

    let mut runs: Vec<u32> = Vec::new();
    let mut covered: u64 = 0;
    for y in i64::from(y0)..=y1 {
        let mut x = i64::from(x0);
        while x <= x1 {
            if !inside(x as f64, y as f64) {
                x += 1;
                continue;
            }
            let start = x;
            while x <= x1 && inside(x as f64, y as f64) {
                x += 1;
            }
            let begin = y as u64 * u64::from(width) + start as u64;
            let len = (x - start) as u32;
            if begin == covered && !runs.is_empty() {
                // continues the previous foreground run across a row break
                *runs.last_mut().expect("non-empty") += len;
            } else {
                runs.push((begin - covered) as u32);
                runs.push(len);
            }
            covered = begin + u64::from(len);
        }
    }
    if runs.is_empty() || covered < total {
        runs.push((total - covered) as u32);
    }
    runs
}
