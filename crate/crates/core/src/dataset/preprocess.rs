use std::fmt;
use std::path::PathBuf;
use std::process::Command;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixel::{read_image, write_image, Image};

/// Environment variable overriding where external hooks get their temp files.
pub const TMPDIR_ENV: &str = "NIGHTBENCH_TMPDIR";

/// Frame preprocessing applied between degradation and tracking.
///
/// Textual form (used on the command line): `none`, `median:<radius>`,
/// `gaussian:<sigma>`, `gamma:<gamma>`, `external:<command>`. The external
/// command is run through `sh -c` with `{in}` and `{out}` replaced by temp image paths.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreprocessSpec {
    #[default]
    None,
    Median { radius: usize },
    GaussianBlur { sigma: f64 },
    /// Brightening `v -> v^(1/gamma)`, the inverse of a synthesis gamma.
    GammaBoost { gamma: f64 },
    External { command: String },
}

impl PreprocessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PreprocessSpec::None => Ok(()),
            PreprocessSpec::Median { radius } if *radius == 0 => {
                Err(Error::Usage("median radius must be >= 1".into()))
            }
            PreprocessSpec::GaussianBlur { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::Usage(format!("gaussian sigma must be > 0, got {sigma}")))
            }
            PreprocessSpec::GammaBoost { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::Usage(format!("gamma must be > 0, got {gamma}")))
            }
            PreprocessSpec::External { command }
                if !(command.contains("{in}") && command.contains("{out}")) =>
            {
                Err(Error::Usage(
                    "external command must contain both {in} and {out} placeholders".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PreprocessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreprocessSpec::None => f.write_str("none"),
            PreprocessSpec::Median { radius } => write!(f, "median:{radius}"),
            PreprocessSpec::GaussianBlur { sigma } => write!(f, "gaussian:{sigma}"),
            PreprocessSpec::GammaBoost { gamma } => write!(f, "gamma:{gamma}"),
            PreprocessSpec::External { command } => write!(f, "external:{command}"),
        }
    }
}

impl FromStr for PreprocessSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let num = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad preprocess argument `{a}`"))),
            }
        };
        let spec = match kind {
            "none" => PreprocessSpec::None,
            "median" => {
                let r = num(1.0)?;
                if r.fract() != 0.0 || r < 0.0 {
                    return Err(Error::Usage(format!("median radius must be a positive integer, got {r}")));
                }
                PreprocessSpec::Median { radius: r as usize }
            }
            "gaussian" | "gaussian_blur" => PreprocessSpec::GaussianBlur { sigma: num(1.0)? },
            "gamma" | "gamma_boost" => PreprocessSpec::GammaBoost { gamma: num(0.5)? },
            "external" => PreprocessSpec::External {
                command: arg.unwrap_or("").to_string(),
            },
            other => return Err(Error::Usage(format!("unknown preprocess kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Applies the preprocessing step to one frame.
pub fn preprocess_frame(img: &Image, spec: &PreprocessSpec) -> Result<Image> {
    spec.validate()?;
    match spec {
        PreprocessSpec::None => Ok(img.clone()),
        PreprocessSpec::Median { radius } => Ok(median_filter(img, *radius)),
        PreprocessSpec::GaussianBlur { sigma } => Ok(gaussian_blur(img, *sigma)),
        PreprocessSpec::GammaBoost { gamma } => Ok(img.map_channels(|v| v.powf(1.0 / gamma))),
        PreprocessSpec::External { command } => run_external(img, command),
    }
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Per-channel median over a `(2r+1)^2` window with replicated borders.
pub fn median_filter(img: &Image, radius: usize) -> Image {
    let (w, h) = (img.width(), img.height());
    let data = img.data();
    let r = radius as isize;
    let mut window = Vec::with_capacity((2 * radius + 1).pow(2));
    Image::from_fn(h, w, |x, y| {
        let mut out = [0.0; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            window.clear();
            for dy in -r..=r {
                let yy = clamp_index(y as isize + dy, h);
                for dx in -r..=r {
                    let xx = clamp_index(x as isize + dx, w);
                    window.push(data[(yy * w + xx) * 3 + c]);
                }
            }
            let mid = window.len() / 2;
            *slot = *window
                .select_nth_unstable_by(mid, |a, b| a.total_cmp(b))
                .1;
        }
        out
    })
}

/// Separable Gaussian blur with radius `ceil(3 sigma)` and replicated borders.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (w, h) = (img.width(), img.height());
    let src = img.data();
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                tmp[(y * w + x) * 3 + c] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, wk)| wk * src[(y * w + clamp_index(x as isize + k as isize - radius, w)) * 3 + c])
                    .sum();
            }
        }
    }
    Image::from_fn(h, w, |x, y| {
        let mut out = [0.0; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = kernel
                .iter()
                .enumerate()
                .map(|(k, wk)| wk * tmp[(clamp_index(y as isize + k as isize - radius, h) * w + x) * 3 + c])
                .sum();
        }
        out
    })
}

fn shell_quote(path: &std::path::Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

fn temp_base() -> PathBuf {
    std::env::var_os(TMPDIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
}

fn run_external(img: &Image, template: &str) -> Result<Image> {
    let base = temp_base();
    let dir = tempfile::Builder::new()
        .prefix("nightbench-")
        .tempdir_in(&base)
        .map_err(|e| Error::io(&base, e))?;
    let input = dir.path().join("in.png");
    let output = dir.path().join("out.png");
    write_image(img, &input)?;
    let command = template
        .replace("{in}", &shell_quote(&input))
        .replace("{out}", &shell_quote(&output));
    let result = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .output()
        .map_err(|e| Error::Preprocess(format!("could not spawn `{command}`: {e}")));
    let fail = |msg: String| {
        // keep the temp files around for inspection
        let kept = dir.keep();
        Err(Error::Preprocess(format!("{msg} (temp files kept in {})", kept.display())))
    };
    let out = match result {
        Ok(out) => out,
        Err(e) => return fail(e.to_string()),
    };
    if !out.status.success() {
        let stderr = String::from_utf8_lossy(&out.stderr);
        return fail(format!("`{command}` exited with {}: {}", out.status, stderr.trim()));
    }
    let processed = match read_image(&output) {
        Ok(img) => img,
        Err(e) => return fail(format!("`{command}` produced no readable output: {e}")),
    };
    if (processed.width(), processed.height()) != (img.width(), img.height()) {
        return fail(format!(
            "`{command}` changed frame size from {}x{} to {}x{}",
            img.width(),
            img.height(),
            processed.width(),
            processed.height()
        ));
    }
    Ok(processed)
}
