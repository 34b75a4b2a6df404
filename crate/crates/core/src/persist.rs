//! Plain-text model files.
//!
//! ```text
//! soc-sentinel-model v1
//! topology 9 7 1
//! seed 42
//! scale cycle_number <min> <max>
//! ...                                  (one line per column, SOC last)
//! layer 0 9 7
//! w <fan_out values>                   (fan_in rows)
//! b <fan_out values>
//! ...
//! end
//! ```
//!
//! Reals are written in scientific notation with 17 significant digits, so
//! a load reproduces every parameter bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::{Normalizer, COLUMN_NAMES, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::network::{Network, Topology};

pub const MAGIC: &str = "soc-sentinel-model";
pub const VERSION: u32 = 1;

/// A trained network together with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub network: Network,
    pub normalizer: Normalizer,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

impl Model {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let topo = self.network.topology();
        let sizes: Vec<String> = topo.sizes().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{MAGIC} v{VERSION}");
        let _ = writeln!(out, "topology {}", sizes.join(" "));
        let _ = writeln!(out, "seed {}", self.network.seed());
        for (i, name) in COLUMN_NAMES.iter().enumerate() {
            let (min, max) = self.normalizer.bounds(i);
            let _ = writeln!(out, "scale {name} {} {}", real(min), real(max));
        }
        for (k, layer) in self.network.layers().iter().enumerate() {
            let _ = writeln!(out, "layer {k} {} {}", layer.fan_in, layer.fan_out);
            for row in layer.weights.chunks(layer.fan_out) {
                let values: Vec<String> = row.iter().map(|&w| real(w)).collect();
                let _ = writeln!(out, "w {}", values.join(" "));
            }
            let values: Vec<String> = layer.biases.iter().map(|&b| real(b)).collect();
            let _ = writeln!(out, "b {}", values.join(" "));
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);

        let (n, header) = lines.next_line()?;
        if header != format!("{MAGIC} v{VERSION}") {
            return Err(format_error(
                n,
                format!("expected header '{MAGIC} v{VERSION}'"),
            ));
        }

        let (n, fields) = lines.keyword("topology")?;
        let sizes = fields
            .iter()
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| format_error(n, "layer sizes must be integers".into()))?;
        if sizes.len() < 2 {
            return Err(format_error(
                n,
                "need at least input and output sizes".into(),
            ));
        }
        let topology = Topology::new(
            sizes[0],
            sizes[1..sizes.len() - 1].to_vec(),
            sizes[sizes.len() - 1],
        )
        .map_err(|e| format_error(n, e.to_string()))?;

        let (n, fields) = lines.keyword("seed")?;
        let seed = match fields.as_slice() {
            [s] => s
                .parse::<u64>()
                .map_err(|_| format_error(n, "bad seed".into()))?,
            _ => return Err(format_error(n, "expected one seed value".into())),
        };

        let mut mins = [0.0; NUM_FEATURES + 1];
        let mut maxs = [0.0; NUM_FEATURES + 1];
        for (i, name) in COLUMN_NAMES.iter().enumerate() {
            let (n, fields) = lines.keyword("scale")?;
            if fields.len() != 3 || fields[0] != *name {
                return Err(format_error(
                    n,
                    format!("expected 'scale {name} <min> <max>'"),
                ));
            }
            mins[i] = parse_real(n, fields[1])?;
            maxs[i] = parse_real(n, fields[2])?;
        }
        let normalizer = Normalizer::from_bounds(mins, maxs)?;

        let mut params = Vec::with_capacity(topology.param_count());
        let layer_sizes: Vec<usize> = topology.sizes().collect();
        for (k, shape) in layer_sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (shape[0], shape[1]);
            let (n, fields) = lines.keyword("layer")?;
            if fields != [k.to_string(), fan_in.to_string(), fan_out.to_string()] {
                return Err(format_error(
                    n,
                    format!("expected 'layer {k} {fan_in} {fan_out}'"),
                ));
            }
            for key in std::iter::repeat_n("w", fan_in).chain(["b"]) {
                let (n, fields) = lines.keyword(key)?;
                if fields.len() != fan_out {
                    return Err(format_error(n, format!("expected {fan_out} values")));
                }
                for f in fields {
                    params.push(parse_real(n, f)?);
                }
            }
        }
        let (n, end) = lines.next_line()?;
        if end != "end" {
            return Err(format_error(n, "expected 'end'".into()));
        }

        let network = Network::from_params(topology, seed, &params)?;
        Ok(Self {
            network,
            normalizer,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn format_error(line: usize, reason: String) -> Error {
    Error::ModelFormat { line, reason }
}

fn parse_real(line: usize, text: &str) -> Result<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format_error(line, format!("{text:?} is not a finite real"))),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if !line.is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(format_error(self.last + 1, "unexpected end of file".into()))
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, line) = self.next_line()?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(key) {
            return Err(format_error(n, format!("expected '{key}' line")));
        }
        Ok((n, fields.collect()))
    }
}
