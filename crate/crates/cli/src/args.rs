use std::path::PathBuf;

use affine_ensemble::{KernelSpec, Normalization, Point, WaveletProfile};
use clap::{Args, ValueEnum};

use crate::CliError;

/// Kernel selection shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Field strength of the Maass Laplacian (B > 1/2).
    #[arg(long = "B", value_name = "B", conflicts_with_all = ["alpha", "profile"])]
    pub b: Option<f64>,
    /// Laguerre parameter, instead of --B.
    #[arg(long, conflicts_with = "profile")]
    pub alpha: Option<f64>,
    /// Landau level, 0 <= n <= floor(B - 1/2).
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Sampled wavelet profile: lines `xi,re[,im]`.
    #[arg(long, value_name = "FILE")]
    pub profile: Option<PathBuf>,
    /// Small-frequency exponent of the sampled profile.
    #[arg(long, requires = "profile")]
    pub exponent: Option<f64>,
    #[arg(long, value_enum, default_value_t = NormArg::Diagonal1)]
    pub normalization: NormArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Diagonal1,
    Projection,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Diagonal1 => Normalization::Diagonal1,
            NormArg::Projection => Normalization::Projection,
        }
    }
}

impl KernelArgs {
    /// Builds the kernel; any failure here is a usage error.
    pub fn spec(&self) -> Result<KernelSpec, CliError> {
        let spec = match (self.b, self.alpha, &self.profile) {
            (Some(b), None, None) => KernelSpec::maass_landau(b, self.n),
            (None, Some(alpha), None) => KernelSpec::laguerre_mode(alpha, self.n),
            (None, None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read profile {}: {e}", path.display())))?;
                WaveletProfile::parse(&text, self.exponent).and_then(KernelSpec::generic)
            }
            _ => return Err(CliError::Usage("select a kernel with one of --B, --alpha or --profile".into())),
        };
        let spec = spec.map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec.with_normalization(self.normalization.into()))
    }
}

/// Parses `a+bi`, `a-bi`, `bi`, `i` or `a` (the last is rejected as not in the half-plane).
pub fn parse_complex(text: &str) -> Result<(f64, f64), String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number '{text}' (expected a+bi)");
    let Some(body) = t.strip_suffix('i') else {
        let re: f64 = t.parse().map_err(|_| bad())?;
        return Ok((re, 0.0));
    };
    // split at the last sign that is not at the start or after an exponent marker
    let split = body
        .char_indices()
        .filter(|&(k, c)| (c == '+' || c == '-') && k > 0 && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
        .map(|(k, _)| k)
        .last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse().map_err(|_| bad())?,
    };
    Ok((re.parse().map_err(|_| bad())?, im))
}

pub fn parse_point(text: &str) -> Result<Point, String> {
    let (x, s) = parse_complex(text)?;
    Point::new(x, s).map_err(|e| format!("'{text}': {e}"))
}

/// `x,s` with `s > 0`.
pub fn parse_center(text: &str) -> Result<Point, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [x, s] = parts.as_slice() else {
        return Err(format!("center '{text}' must be x,s"));
    };
    let x: f64 = x.trim().parse().map_err(|_| format!("bad x in center '{text}'"))?;
    let s: f64 = s.trim().parse().map_err(|_| format!("bad s in center '{text}'"))?;
    Point::new(x, s).map_err(|e| format!("center '{text}': {e}"))
}

/// A pseudohyperbolic radius in `(0, 1)`.
pub fn parse_radius(text: &str) -> Result<f64, String> {
    let r: f64 = text.trim().parse().map_err(|_| format!("bad radius '{text}'"))?;
    if !(r > 0.0 && r < 1.0) {
        return Err(format!("radius must lie in (0, 1), got {r}"));
    }
    Ok(r)
}
