use super::{InstanceMask, MaskError, PixelPoint};

/// Tight inclusive bounding box of a mask's foreground, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extents {
    pub min_x: u32,
    pub max_x: u32,
    pub min_y: u32,
    pub max_y: u32,
}

impl Extents {
    /// Inclusive pixel count along x.
    pub fn width_px(&self) -> u32 {
        self.max_x - self.min_x + 1
    }

    /// Inclusive pixel count along y.
    pub fn height_px(&self) -> u32 {
        self.max_y - self.min_y + 1
    }

    pub fn contains(&self, p: &PixelPoint) -> bool {
        p.x >= f64::from(self.min_x)
            && p.x <= f64::from(self.max_x)
            && p.y >= f64::from(self.min_y)
            && p.y <= f64::from(self.max_y)
    }
}

pub fn area_px(mask: &InstanceMask) -> u64 {
    mask.rle()
        .iter()
        .skip(1)
        .step_by(2)
        .map(|&r| u64::from(r))
        .sum()
}

/// Mean of the foreground pixel centers.
pub fn centroid(mask: &InstanceMask) -> Result<PixelPoint, MaskError> {
    let mut count = 0u64;
    // twice the coordinate sums, so span sums stay integral
    let mut sum_x2 = 0u64;
    let mut sum_y = 0u64;
    for span in mask.spans() {
        let len = u64::from(span.len());
        count += len;
        sum_x2 += len * (u64::from(span.x_start) + u64::from(span.x_end) - 1);
        sum_y += len * u64::from(span.y);
    }
    if count == 0 {
        return Err(MaskError::EmptyMask);
    }
    let n = count as f64;
    Ok(PixelPoint::new(sum_x2 as f64 / (2.0 * n), sum_y as f64 / n))
}

pub fn extents(mask: &InstanceMask) -> Result<Extents, MaskError> {
    let mut spans = mask.spans();
    let first = spans.next().ok_or(MaskError::EmptyMask)?;
    let mut ext = Extents {
        min_x: first.x_start,
        max_x: first.x_end - 1,
        min_y: first.y,
        max_y: first.y,
    };
    for span in spans {
        ext.min_x = ext.min_x.min(span.x_start);
        ext.max_x = ext.max_x.max(span.x_end - 1);
        ext.max_y = span.y;
    }
    Ok(ext)
}

/// Topmost foreground pixel of every occupied column, ordered by x.
pub fn top_curve(mask: &InstanceMask) -> Result<Vec<PixelPoint>, MaskError> {
    let mut top: Vec<Option<u32>> = vec![None; mask.width() as usize];
    for span in mask.spans() {
        for slot in &mut top[span.x_start as usize..span.x_end as usize] {
            // spans arrive row by row, so the first hit is the minimum
            slot.get_or_insert(span.y);
        }
    }
    let curve: Vec<PixelPoint> = top
        .iter()
        .enumerate()
        .filter_map(|(x, y)| y.map(|y| PixelPoint::new(x as f64, f64::from(y))))
        .collect();
    if curve.is_empty() {
        return Err(MaskError::EmptyMask);
    }
    Ok(curve)
}
