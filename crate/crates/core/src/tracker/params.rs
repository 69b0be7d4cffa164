use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{ArrayBase, Dimension, OwnedRepr};

use crate::error::{Error, Result};

/// Header line of the textual parameter format.
pub const PARAMS_HEADER: &str = "nightbench-params v1";

/// Read-only view of one named parameter matrix.
#[derive(Debug)]
pub struct Tensor<'a> {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

impl<'a> Tensor<'a> {
    pub(crate) fn new<D: Dimension>(
        name: String,
        rows: usize,
        cols: usize,
        array: &'a ArrayBase<OwnedRepr<f64>, D>,
    ) -> Self {
        let data = array.as_slice().expect("parameter arrays are in standard layout");
        debug_assert_eq!(data.len(), rows * cols);
        Tensor { name, rows, cols, data }
    }
}

#[derive(Debug)]
pub struct TensorMut<'a> {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a mut [f64],
}

impl<'a> TensorMut<'a> {
    pub(crate) fn new<D: Dimension>(
        name: String,
        rows: usize,
        cols: usize,
        array: &'a mut ArrayBase<OwnedRepr<f64>, D>,
    ) -> Self {
        let data = array
            .as_slice_mut()
            .expect("parameter arrays are in standard layout");
        debug_assert_eq!(data.len(), rows * cols);
        TensorMut { name, rows, cols, data }
    }
}

/// A fixed collection of named parameter matrices.
///
/// Gradients are represented with the same type as the parameters, so
/// [`ParamSet::flatten`] of a parameter set and of its gradient line up index by index.
pub trait ParamSet {
    fn tensors(&self) -> Vec<Tensor<'_>>;
    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Overwrites all parameters from a flat slice in [`ParamSet::flatten`] order.
    fn assign(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_params(), "flat parameter length mismatch");
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.data.len();
            t.data.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
    }

    /// Plain gradient-descent update `p -= lr * g`.
    fn descend(&mut self, grad: &Self, lr: f64)
    where
        Self: Sized,
    {
        let g = grad.flatten();
        let p: Vec<f64> = self.flatten().iter().zip(&g).map(|(p, g)| p - lr * g).collect();
        self.assign(&p);
    }
}

/// Renders parameters in the textual dump format.
///
/// ```text
/// nightbench-params v1
/// tensor <name> <rows> <cols>
/// <cols values>        (one line per row, row-major)
/// ...
/// ```
pub fn params_to_string(params: &impl ParamSet) -> String {
    let mut out = format!("{PARAMS_HEADER}\n");
    for t in params.tensors() {
        writeln!(out, "tensor {} {} {}", t.name, t.rows, t.cols).unwrap();
        for row in t.data.chunks(t.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
    }
    out
}

pub fn save_params(params: &impl ParamSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, params_to_string(params)).map_err(|e| Error::io(path, e))
}

/// Parsed tensors keyed by name, each as `(rows, cols, values)`.
pub type TensorMap = BTreeMap<String, (usize, usize, Vec<f64>)>;

pub fn parse_tensors(text: &str, path: &Path) -> Result<TensorMap> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h == PARAMS_HEADER => {}
        _ => return Err(err(1, format!("expected header `{PARAMS_HEADER}`"))),
    }
    let mut map = TensorMap::new();
    while let Some((no, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (name, rows, cols) = match parts.as_slice() {
            ["tensor", name, r, c] => {
                let r: usize = r.parse().map_err(|_| err(no, format!("bad row count `{r}`")))?;
                let c: usize = c.parse().map_err(|_| err(no, format!("bad column count `{c}`")))?;
                (name.to_string(), r, c)
            }
            _ => return Err(err(no, "expected `tensor <name> <rows> <cols>`".into())),
        };
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (rno, row) = lines
                .next()
                .ok_or_else(|| err(no, format!("tensor {name}: missing rows")))?;
            let parsed: Vec<f64> = row
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| err(rno, format!("`{v}` is not a number"))))
                .collect::<Result<_>>()?;
            if parsed.len() != cols {
                return Err(err(rno, format!("tensor {name}: expected {cols} values, got {}", parsed.len())));
            }
            values.extend(parsed);
        }
        if map.insert(name.clone(), (rows, cols, values)).is_some() {
            return Err(err(no, format!("duplicate tensor {name}")));
        }
    }
    Ok(map)
}

/// Fills `params` from a parsed dump; names and shapes must match exactly.
pub fn assign_from_tensors(params: &mut impl ParamSet, mut map: TensorMap, path: &Path) -> Result<()> {
    let shape_err = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg,
    };
    for t in params.tensors_mut() {
        let (r, c, values) = map
            .remove(&t.name)
            .ok_or_else(|| shape_err(format!("missing tensor {}", t.name)))?;
        if (r, c) != (t.rows, t.cols) {
            return Err(shape_err(format!(
                "tensor {} has shape {r}x{c}, expected {}x{}",
                t.name, t.rows, t.cols
            )));
        }
        t.data.copy_from_slice(&values);
    }
    if let Some(extra) = map.keys().next() {
        return Err(shape_err(format!("unexpected tensor {extra}")));
    }
    Ok(())
}

pub(crate) fn read_tensors(path: &Path) -> Result<TensorMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tensors(&text, path)
}

pub(crate) fn tensor_shape(map: &TensorMap, name: &str, path: &Path) -> Result<(usize, usize)> {
    map.get(name).map(|(r, c, _)| (*r, *c)).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: format!("missing tensor {name}"),
    })
}
