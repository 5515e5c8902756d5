use super::MaskError;

/// Dense row-major binary image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGrid {
    width: u32,
    height: u32,
    cells: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            cells: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.len()) as u32;
        let mut grid = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.len() as u32, width, "ragged rows");
            for (x, &v) in row.iter().enumerate() {
                grid.set(x as u32, y as u32, v != 0);
            }
        }
        grid
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.cells[self.index(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.cells[i] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    fn index(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "({x}, {y}) out of bounds");
        y as usize * self.width as usize + x as usize
    }
}

pub(super) fn validate(width: u32, height: u32, rle: &[u32]) -> Result<(), MaskError> {
    if width == 0 || height == 0 {
        return Err(MaskError::InvalidDimensions { width, height });
    }
    if let Some(pos) = rle.iter().skip(1).position(|&r| r == 0) {
        return Err(MaskError::MalformedRle(format!(
            "zero-length run at position {}",
            pos + 1
        )));
    }
    let total: u64 = rle.iter().map(|&r| u64::from(r)).sum();
    let expected = u64::from(width) * u64::from(height);
    if total != expected {
        return Err(MaskError::MalformedRle(format!(
            "runs sum to {total}, expected {width}x{height} = {expected}"
        )));
    }
    Ok(())
}

/// Expand an RLE payload into a dense grid.
pub fn rle_decode(width: u32, height: u32, rle: &[u32]) -> Result<BinaryGrid, MaskError> {
    validate(width, height, rle)?;
    let mut grid = BinaryGrid::new(width, height);
    let mut pos = 0usize;
    for (i, &run) in rle.iter().enumerate() {
        let run = run as usize;
        if i % 2 == 1 {
            grid.cells[pos..pos + run].fill(true);
        }
        pos += run;
    }
    Ok(grid)
}

/// Run-length encode a grid, leading run counting background.
pub fn rle_encode(grid: &BinaryGrid) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u32;
    for &cell in &grid.cells {
        if cell != current {
            runs.push(len);
            len = 0;
            current = cell;
        }
        len += 1;
    }
    runs.push(len);
    runs
}

/// A horizontal stretch of foreground pixels: `x_start..x_end` on row `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSpan {
    pub y: u32,
    pub x_start: u32,
    pub x_end: u32,
}

impl RowSpan {
    pub fn len(&self) -> u32 {
        self.x_end - self.x_start
    }

    pub fn is_empty(&self) -> bool {
        self.x_end == self.x_start
    }
}

/// Iterator over the foreground of an RLE mask, split at row boundaries.
pub struct Spans<'a> {
    width: u64,
    runs: std::slice::Iter<'a, u32>,
    run_index: usize,
    pos: u64,
    pending: u64,
}

impl<'a> Spans<'a> {
    pub(super) fn new(width: u32, rle: &'a [u32]) -> Self {
        Self {
            width: u64::from(width),
            runs: rle.iter(),
            run_index: 0,
            pos: 0,
            pending: 0,
        }
    }
}

impl Iterator for Spans<'_> {
    type Item = RowSpan;

    fn next(&mut self) -> Option<RowSpan> {
        while self.pending == 0 {
            let run = u64::from(*self.runs.next()?);
            let is_foreground = self.run_index % 2 == 1;
            self.run_index += 1;
            if is_foreground {
                self.pending = run;
            } else {
                self.pos += run;
            }
        }
        let y = self.pos / self.width;
        let x_start = self.pos % self.width;
        let take = self.pending.min(self.width - x_start);
        self.pos += take;
        self.pending -= take;
        Some(RowSpan {
            y: y as u32,
            x_start: x_start as u32,
            x_end: (x_start + take) as u32,
        })
    }
}
