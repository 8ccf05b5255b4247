//! Plain-text checkpoints.
//!
//! ```text
//! glt-checkpoint 1
//! links <N>
//! hops <K>
//! mask <k> <count>        (then <count> lines "i j", one per nonzero entry)
//! block <name> <len>      (then one line of <len> space-separated values)
//! ```
//!
//! Values are written in shortest round-trip exponent form, so a write/read
//! cycle reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{GltModel, Params};
use crate::error::{Error, Result};
use crate::graph::{BinaryMask, MaskKind};

const MAGIC: &str = "glt-checkpoint 1";

pub fn write_checkpoint(model: &GltModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render(model)).map_err(|e| Error::io(path, e))
}

fn render(model: &GltModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "links {}", model.num_links());
    let _ = writeln!(out, "hops {}", model.hops());
    for (k, mask) in model.masks().iter().enumerate() {
        let _ = writeln!(out, "mask {} {}", k + 1, mask.nonzero_count());
        for ((i, j), &v) in mask.values().indexed_iter() {
            if v != 0 {
                let _ = writeln!(out, "{i} {j}");
            }
        }
    }
    for block in model.params().blocks() {
        let _ = writeln!(out, "block {} {}", block.name, block.values.len());
        let line: Vec<String> = block.values.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (idx, text) = self.inner.next().ok_or_else(|| Error::Checkpoint {
            line: self.line + 1,
            reason: "unexpected end of file".into(),
        })?;
        self.line = idx + 1;
        Ok(text)
    }

    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::Checkpoint {
            line: self.line,
            reason: reason.into(),
        })
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let text = self.next()?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return self.fail(format!("expected `{key}`, found {text:?}"));
        }
        Ok(parts.collect())
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().or_else(|_| self.fail(format!("bad number {s:?}")))
    }
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<GltModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

fn parse(text: &str) -> Result<GltModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    if lines.next()? != MAGIC {
        return lines.fail("not a checkpoint file");
    }
    let n: usize = match lines.keyed("links")?.as_slice() {
        [v] => lines.number(v)?,
        _ => return lines.fail("malformed links line"),
    };
    let k: usize = match lines.keyed("hops")?.as_slice() {
        [v] => lines.number(v)?,
        _ => return lines.fail("malformed hops line"),
    };
    let mut masks = Vec::with_capacity(k);
    for hop in 1..=k {
        let count: usize = match lines.keyed("mask")?.as_slice() {
            [h, c] if lines.number::<usize>(h)? == hop => lines.number(c)?,
            _ => return lines.fail(format!("expected mask header for hop {hop}")),
        };
        let mut values = Array2::<u8>::zeros((n, n));
        for _ in 0..count {
            let coords: Vec<&str> = lines.next()?.split_whitespace().collect();
            let (i, j): (usize, usize) = match coords.as_slice() {
                [i, j] => (lines.number(i)?, lines.number(j)?),
                _ => return lines.fail("expected `i j`"),
            };
            if i >= n || j >= n {
                return lines.fail(format!("coordinate ({i},{j}) out of range"));
            }
            values[[i, j]] = 1;
        }
        masks.push(BinaryMask::new(values, MaskKind::Ultimate, Some(hop))?);
    }
    let mut params = Params::zeros(n, k);
    for block in params.blocks_mut() {
        match lines.keyed("block")?.as_slice() {
            [name, len] if *name == block.name && lines.number::<usize>(len)? == block.values.len() => {}
            other => return lines.fail(format!("expected block {} of {}, found {other:?}", block.name, block.values.len())),
        }
        let row = lines.next()?;
        let mut parsed = 0;
        for (slot, token) in block.values.iter_mut().zip(row.split_whitespace()) {
            *slot = lines.number(token)?;
            parsed += 1;
        }
        if parsed != block.values.len() || row.split_whitespace().count() != parsed {
            return lines.fail(format!("block {} has the wrong number of values", block.name));
        }
    }
    GltModel::from_parts(masks, params)
}
