//! Map file formats.
//!
//! Grid text: a header line `width height resolution`, then `height` lines of
//! `width` whitespace-separated `0`/`1` tokens, top row first.
//!
//! PGM: `P2` (ASCII) or `P5` (binary, 8- or 16-bit big-endian samples) with
//! `#` comments in the header. A pixel is an obstacle when it is darker than
//! half scale: `value * 255 < 128 * maxval` (for `maxval = 255`, `value < 128`).

use std::path::Path;

use super::{GridError, OccupancyGrid};

pub fn parse_grid_text(text: &str) -> Result<OccupancyGrid, GridError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or(GridError::Parse {
        line: 1,
        message: "missing header `width height resolution`".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let bad_header = |message: String| GridError::Parse {
        line: hline,
        message,
    };
    if fields.len() != 3 {
        return Err(bad_header(format!(
            "header needs 3 fields `width height resolution`, found {}",
            fields.len()
        )));
    }
    let width: usize = fields[0]
        .parse()
        .map_err(|_| bad_header(format!("width `{}` is not a positive integer", fields[0])))?;
    let height: usize = fields[1]
        .parse()
        .map_err(|_| bad_header(format!("height `{}` is not a positive integer", fields[1])))?;
    let resolution: f64 = fields[2]
        .parse()
        .map_err(|_| bad_header(format!("resolution `{}` is not a number", fields[2])))?;
    if width == 0 || height == 0 {
        return Err(bad_header(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(bad_header(format!(
            "resolution must be positive, got {resolution}"
        )));
    }

    let mut cells = vec![0u8; width * height];
    for row in 0..height {
        let (lineno, line) = lines.next().ok_or(GridError::Parse {
            line: hline + row + 1,
            message: format!("expected {height} rows, found {row}"),
        })?;
        let y = height - 1 - row;
        let mut count = 0;
        for (x, tok) in line.split_whitespace().enumerate() {
            let v = match tok {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(GridError::Parse {
                        line: lineno,
                        message: format!("token {} is `{other}`, expected 0 or 1", x + 1),
                    })
                }
            };
            if x < width {
                cells[y * width + x] = v;
            }
            count += 1;
        }
        if count != width {
            return Err(GridError::Parse {
                line: lineno,
                message: format!("expected {width} cells, found {count}"),
            });
        }
    }
    if let Some((lineno, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(GridError::Parse {
            line: lineno,
            message: format!("unexpected content after the last row: `{}`", extra.trim()),
        });
    }
    OccupancyGrid::from_cells(width, height, resolution, cells)
}

pub fn write_grid_text(grid: &OccupancyGrid) -> String {
    let mut out = format!("{} {} {}\n", grid.width(), grid.height(), grid.resolution());
    for y in (0..grid.height()).rev() {
        let row = &grid.cells()[y * grid.width()..(y + 1) * grid.width()];
        let tokens: Vec<&str> = row
            .iter()
            .map(|&c| if c == 1 { "1" } else { "0" })
            .collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

struct PgmReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmReader<'_> {
    fn err(&self, message: impl Into<String>) -> GridError {
        GridError::Pgm {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&str, GridError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return Err(self.err(format!("expected {what}, found end of file")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| GridError::Pgm {
            offset: start,
            message: format!("{what} is not ASCII"),
        })
    }

    fn number(&mut self, what: &str) -> Result<usize, GridError> {
        let start = self.pos;
        let tok = self.token(what)?.to_owned();
        tok.parse().map_err(|_| GridError::Pgm {
            offset: start,
            message: format!("{what} `{tok}` is not a non-negative integer"),
        })
    }
}

pub fn parse_pgm(bytes: &[u8], resolution: f64) -> Result<OccupancyGrid, GridError> {
    let mut r = PgmReader { bytes, pos: 0 };
    let magic = r.token("magic number")?.to_owned();
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => {
            return Err(GridError::Pgm {
                offset: 0,
                message: format!("unsupported magic `{other}`, expected P2 or P5"),
            })
        }
    };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(r.err(format!("dimensions must be positive, got {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(r.err(format!("maxval {maxval} out of range 1..=65535")));
    }
    let obstacle = |v: usize| v * 255 < 128 * maxval;
    let mut cells = vec![0u8; width * height];
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if r.pos >= bytes.len() || !bytes[r.pos].is_ascii_whitespace() {
            return Err(r.err("missing whitespace after maxval"));
        }
        r.pos += 1;
        let sample = if maxval < 256 { 1 } else { 2 };
        let need = width * height * sample;
        if bytes.len() - r.pos < need {
            return Err(r.err(format!(
                "raster needs {need} bytes, only {} remain",
                bytes.len() - r.pos
            )));
        }
        for i in 0..width * height {
            let at = r.pos + i * sample;
            let v = if sample == 1 {
                bytes[at] as usize
            } else {
                (bytes[at] as usize) << 8 | bytes[at + 1] as usize
            };
            let (x, row) = (i % width, i / width);
            cells[(height - 1 - row) * width + x] = obstacle(v) as u8;
        }
    } else {
        for i in 0..width * height {
            let v = r.number("pixel value")?;
            if v > maxval {
                return Err(r.err(format!("pixel value {v} exceeds maxval {maxval}")));
            }
            let (x, row) = (i % width, i / width);
            cells[(height - 1 - row) * width + x] = obstacle(v) as u8;
        }
    }
    OccupancyGrid::from_cells(width, height, resolution, cells)
}

/// Reads a grid-text or PGM map, picking the format from the magic bytes.
/// `pgm_resolution` applies only to PGM input, which carries no scale.
pub fn read_map(path: &Path, pgm_resolution: f64) -> Result<OccupancyGrid, GridError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        parse_pgm(&bytes, pgm_resolution)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|e| GridError::Pgm {
            offset: e.valid_up_to(),
            message: "map is neither PGM nor UTF-8 grid text".into(),
        })?;
        parse_grid_text(text)
    }
}
