//! Run configuration: a flat `key = value` file with `#` comments.
//!
//! ```text
//! n = 3
//! p = 2
//! q = 4
//! alpha = "1"
//! V = "1 + x1^2 + x2^2 + x3^2"
//! K = "1"
//! box = "-1,1"          # one range for every axis, or "lo,hi; lo,hi; ..."
//! grid_n = 8
//! tol.grad = 1e-4
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::field::{BoxDomain, CoefficientField};
use crate::locator::CertifyOptions;
use crate::model::ProblemParams;

/// A rejected configuration, located by key and byte offset.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(
                f,
                "config key `{k}` at byte {}: {}",
                self.offset, self.message
            ),
            None => write!(f, "config at byte {}: {}", self.offset, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Tolerance overrides (`tol.<name>` keys).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative bisection tolerance on w(0).
    pub shoot: f64,
    /// Pohozaev, Nehari and ODE residual thresholds.
    pub residual: f64,
    pub decay: f64,
    pub grad: f64,
    /// Coordinate-field residual threshold at R = r_max/2.
    pub coordinate: f64,
    /// |N| threshold for candidates; 10⁻⁶ of the grid maximum when unset.
    pub locate: Option<f64>,
    pub clarke_radius: f64,
    /// Positivity floor for α and V on the box.
    pub floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = CertifyOptions::default();
        Self {
            shoot: 1e-12,
            residual: c.residual_tol,
            decay: c.decay_tol,
            grad: c.grad_tol,
            coordinate: 1e-4,
            locate: None,
            clarke_radius: c.clarke_radius,
            floor: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub alpha: String,
    pub v: String,
    pub k: String,
    pub field: CoefficientField,
    pub domain: Option<BoxDomain>,
    pub grid_n: usize,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub clarke_samples: usize,
}

impl RunConfig {
    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            residual_tol: self.tolerances.residual,
            decay_tol: self.tolerances.decay,
            grad_tol: self.tolerances.grad,
            clarke_radius: self.tolerances.clarke_radius,
            clarke_samples: self.clarke_samples,
            seed: self.seed,
        }
    }
}

const KEYS: &[&str] = &[
    "n",
    "p",
    "q",
    "theta",
    "nonlinearity",
    "terms",
    "test_mode",
    "alpha",
    "V",
    "K",
    "box",
    "grid_n",
    "seed",
    "clarke_samples",
    "output",
    "tol.shoot",
    "tol.residual",
    "tol.decay",
    "tol.grad",
    "tol.coordinate",
    "tol.locate",
    "tol.clarke_radius",
    "tol.floor",
];

struct Entry {
    value: String,
    offset: usize,
}

fn err(key: &str, offset: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        offset,
        message: message.into(),
    }
}

/// Splits the text into entries keyed by name; values are unquoted.
fn tokenize(text: &str) -> Result<HashMap<String, Entry>, ConfigError> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        let start = line_start;
        line_start += line.len();
        let body = strip_comment(line.trim_end_matches(['\n', '\r']));
        if body.trim().is_empty() {
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(ConfigError {
                key: None,
                offset: start,
                message: "expected `key = value`".into(),
            });
        };
        let key = body[..eq].trim();
        let key_offset = start + body.find(key).unwrap_or(0);
        if !KEYS.contains(&key) {
            return Err(err(key, key_offset, "unknown key"));
        }
        let raw = &body[eq + 1..];
        let lead = raw.len() - raw.trim_start().len();
        let offset = start + eq + 1 + lead;
        let raw = raw.trim();
        let value = if let Some(inner) = raw.strip_prefix('"') {
            inner
                .strip_suffix('"')
                .ok_or_else(|| err(key, offset, "unterminated quote"))?
                .to_string()
        } else {
            raw.to_string()
        };
        if entries.contains_key(key) {
            return Err(err(key, key_offset, "duplicate key"));
        }
        entries.insert(key.to_string(), Entry { value, offset });
    }
    Ok(entries)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Reader {
    entries: HashMap<String, Entry>,
}

impl Reader {
    fn offset(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.offset)
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| (e.value.as_str(), e.offset))
    }

    fn required(&self, key: &str) -> Result<(&str, usize), ConfigError> {
        self.raw(key)
            .ok_or_else(|| err(key, 0, "missing required key"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, off)) => v
                .parse()
                .map(Some)
                .map_err(|_| err(key, off, format!("cannot parse `{v}`"))),
        }
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.parse::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(err(key, self.offset(key), "must be finite"));
        }
        Ok(v)
    }
}

/// Parses `lo,hi` or `lo,hi; lo,hi; ...` for dimension `n`.
fn parse_box(text: &str, n: usize, offset: usize) -> Result<BoxDomain, ConfigError> {
    let ranges: Vec<(f64, f64)> = text
        .split(';')
        .map(|part| {
            let nums: Vec<f64> = part
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| {
                    err(
                        "box",
                        offset,
                        format!("cannot parse range `{}`", part.trim()),
                    )
                })?;
            match nums.as_slice() {
                [lo, hi] => Ok((*lo, *hi)),
                _ => Err(err("box", offset, "each range needs exactly `lo,hi`")),
            }
        })
        .collect::<Result<_, _>>()?;
    let ranges = match ranges.len() {
        1 => vec![ranges[0]; n],
        m if m == n => ranges,
        m => {
            return Err(err(
                "box",
                offset,
                format!("{m} ranges given for dimension {n}"),
            ))
        }
    };
    let (lo, hi) = ranges.into_iter().unzip();
    BoxDomain::new(lo, hi).map_err(|e| err("box", offset, e.to_string()))
}

/// Parses `c:e, c:e, ...` power-sum terms.
fn parse_terms(text: &str, offset: usize) -> Result<Vec<(f64, f64)>, ConfigError> {
    text.split(',')
        .map(|t| {
            let (c, e) = t.split_once(':').ok_or_else(|| {
                err(
                    "terms",
                    offset,
                    format!("term `{}` is not `coeff:exponent`", t.trim()),
                )
            })?;
            let c = c.trim().parse::<f64>();
            let e = e.trim().parse::<f64>();
            match (c, e) {
                (Ok(c), Ok(e)) => Ok((c, e)),
                _ => Err(err(
                    "terms",
                    offset,
                    format!("cannot parse term `{}`", t.trim()),
                )),
            }
        })
        .collect()
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let r = Reader {
        entries: tokenize(text)?,
    };
    let n: usize = r
        .parse("n")?
        .ok_or_else(|| err("n", 0, "missing required key"))?;
    if n == 0 {
        return Err(err("n", r.offset("n"), "dimension must be positive"));
    }
    let p = r.number("p", f64::NAN)?;
    let test_mode = r.parse::<bool>("test_mode")?.unwrap_or(false);
    let kind = r.raw("nonlinearity").map_or("power", |(v, _)| v);
    let params = match kind {
        "power" => {
            if r.raw("terms").is_some() {
                return Err(err(
                    "terms",
                    r.offset("terms"),
                    "only valid with nonlinearity = sum",
                ));
            }
            let q = r.number("q", f64::NAN)?;
            if q.is_nan() {
                return Err(err("q", 0, "missing required key"));
            }
            ProblemParams::pure_power(n, p, q, r.number("theta", q)?)
        }
        "sum" => {
            let (text, off) = r.required("terms")?;
            let terms = parse_terms(text, off)?;
            let smallest = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
            ProblemParams::power_sum(n, p, &terms, r.number("theta", smallest)?)
        }
        other => {
            return Err(err(
                "nonlinearity",
                r.offset("nonlinearity"),
                format!("`{other}` is neither `power` nor `sum`"),
            ))
        }
    };
    let params = ProblemParams {
        test_mode,
        ..params
    };
    if p.is_nan() {
        return Err(err("p", 0, "missing required key"));
    }
    if n < 3 && !test_mode {
        return Err(err("n", r.offset("n"), "n < 3 needs test_mode = true"));
    }
    if let Err(e) = params.ensure_valid() {
        let key = if kind == "sum" { "terms" } else { "q" };
        return Err(err(key, r.offset(key), e.to_string()));
    }

    let mut exprs = Vec::new();
    for key in ["alpha", "V", "K"] {
        let (text, off) = r.required(key)?;
        crate::expr::parse(text, n).map_err(|e| err(key, off, e.to_string()))?;
        exprs.push(text.to_string());
    }
    let field = CoefficientField::parse(&exprs[0], &exprs[1], &exprs[2], n)
        .map_err(|e| err("alpha", r.offset("alpha"), e.to_string()))?;

    let domain = match r.raw("box") {
        Some((text, off)) => Some(parse_box(text, n, off)?),
        None => None,
    };
    let grid_n: usize = r.parse("grid_n")?.unwrap_or(8);
    if grid_n < 2 {
        return Err(err("grid_n", r.offset("grid_n"), "must be at least 2"));
    }

    let d = Tolerances::default();
    let positive = |key: &str, default: f64| -> Result<f64, ConfigError> {
        let v = r.number(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(err(key, r.offset(key), "must be positive"))
        }
    };
    let tolerances = Tolerances {
        shoot: positive("tol.shoot", d.shoot)?,
        residual: positive("tol.residual", d.residual)?,
        decay: positive("tol.decay", d.decay)?,
        grad: positive("tol.grad", d.grad)?,
        coordinate: positive("tol.coordinate", d.coordinate)?,
        locate: match r.raw("tol.locate") {
            Some(_) => Some(positive("tol.locate", 0.0)?),
            None => None,
        },
        clarke_radius: positive("tol.clarke_radius", d.clarke_radius)?,
        floor: positive("tol.floor", d.floor)?,
    };
    let clarke_samples: usize = r.parse("clarke_samples")?.unwrap_or(0);
    if clarke_samples != 0 && clarke_samples < 2 * n + 1 {
        return Err(err(
            "clarke_samples",
            r.offset("clarke_samples"),
            format!("must be at least 2n + 1 = {}", 2 * n + 1),
        ));
    }

    Ok(RunConfig {
        params,
        alpha: exprs[0].clone(),
        v: exprs[1].clone(),
        k: exprs[2].clone(),
        field,
        domain,
        grid_n,
        tolerances,
        output: r.raw("output").map(|(v, _)| PathBuf::from(v)),
        seed: r.parse("seed")?.unwrap_or(0),
        clarke_samples,
    })
}

/// Parses a comma-separated point such as `0.5,0,-1`.
pub fn parse_point(text: &str, n: usize) -> Result<Vec<f64>, String> {
    let z: Vec<f64> = text
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse coordinate `{}`", x.trim()))
        })
        .collect::<Result<_, _>>()?;
    if z.len() != n {
        return Err(format!("point has {} coordinates, expected {n}", z.len()));
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err("point coordinates must be finite".into());
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WELL: &str = r#"
# quadratic well
n = 3
p = 2
q = 4
alpha = "1"
V = "1 + x1^2 + x2^2 + x3^2"   # centered
K = "1"
box = "-1,1"
grid_n = 6
seed = 11
tol.grad = 1e-5
"#;

    #[test]
    fn parses_a_full_config() {
        let c = parse_config(WELL).unwrap();
        assert_eq!(c.params.n, 3);
        assert_eq!(c.params.q(), 4.0);
        assert_eq!(c.params.theta, 4.0);
        assert_eq!(c.domain.unwrap().hi, vec![1.0; 3]);
        assert_eq!((c.grid_n, c.seed), (6, 11));
        assert_eq!(c.tolerances.grad, 1e-5);
        assert_eq!(c.v, "1 + x1^2 + x2^2 + x3^2");
    }

    #[test]
    fn power_sum_terms() {
        let text = "n = 3\np = 2\nnonlinearity = sum\nterms = \"1:4, 0.5:3.5\"\nalpha = \"1\"\nV = \"1\"\nK = \"1\"\n";
        let c = parse_config(text).unwrap();
        assert!(!c.params.is_pure_power());
        assert_eq!(c.params.theta, 3.5);
    }

    #[test]
    fn errors_name_key_and_offset() {
        let text = WELL.replace("\"1 + x1^2 + x2^2 + x3^2\"", "\"1 + x9\"");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("V"));
        assert_eq!(&text[e.offset..e.offset + 8], "\"1 + x9\"");

        let e = parse_config(&WELL.replace("grid_n = 6", "grid_n = six")).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid_n"));
        let e = parse_config(&format!("{WELL}\nbogus = 1\n")).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("bogus"));
        let e = parse_config(&WELL.replace("q = 4", "q = 1.5")).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("q"));
        let e = parse_config(&WELL.replace("box = \"-1,1\"", "box = \"1,-1\"")).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("box"));
        assert!(e.to_string().contains("box"));
    }

    #[test]
    fn points() {
        assert_eq!(
            parse_point("1, -0.5,2e-1", 3).unwrap(),
            vec![1.0, -0.5, 0.2]
        );
        assert!(parse_point("1,2", 3).is_err());
        assert!(parse_point("1,x,2", 3).is_err());
    }
}
