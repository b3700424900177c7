//! Point sequences: CSV ingestion and the built-in generators.

use std::io::Read;
use std::path::Path;

use ballinterp::geometry::{BallPoint, C64};
use ballinterp::interpolation::PointSeq;
use ballinterp::sampling;

use crate::config::SequenceSpec;
use crate::CliError;

/// A sequence together with optional per-point masses (CSV `mass` column).
#[derive(Clone, Debug, PartialEq)]
pub struct PointInput {
    pub seq: PointSeq,
    pub masses: Option<Vec<f64>>,
}

impl PointInput {
    pub fn plain(seq: PointSeq) -> Self {
        Self { seq, masses: None }
    }
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn check_header(headers: &csv::StringRecord) -> Result<(usize, bool), CliError> {
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let has_mass = names.last() == Some(&"mass");
    let coords = if has_mass { &names[..names.len() - 1] } else { &names[..] };
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err(input_err(format!(
            "line 1: header must be re1,im1,…,reN,imN[,mass], got `{}`",
            names.join(",")
        )));
    }
    for (k, pair) in coords.chunks(2).enumerate() {
        let (re, im) = (format!("re{}", k + 1), format!("im{}", k + 1));
        if pair[0] != re || pair[1] != im {
            return Err(input_err(format!("line 1: expected columns {re},{im}, got {},{}", pair[0], pair[1])));
        }
    }
    Ok((coords.len() / 2, has_mass))
}

/// Parse `re1,im1,…,reN,imN[,mass]` rows; errors name the offending line.
pub fn read_points_csv<R: Read>(reader: R) -> Result<PointInput, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| input_err(format!("line 1: {e}")))?.clone();
    let (n, has_mass) = check_header(&headers)?;
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input_err(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, CliError> {
            let s = rec.get(i).unwrap_or("");
            let v: f64 = s
                .parse()
                .map_err(|_| input_err(format!("line {line}: column {} is not a number: `{s}`", i + 1)))?;
            if !v.is_finite() {
                return Err(input_err(format!("line {line}: column {} is not finite", i + 1)));
            }
            Ok(v)
        };
        let coords = (0..n).map(|k| Ok(C64::new(field(2 * k)?, field(2 * k + 1)?))).collect::<Result<Vec<_>, CliError>>()?;
        let p = BallPoint::new(coords);
        if p.norm_sq() >= 1.0 {
            return Err(input_err(format!("line {line}: point has modulus {} ≥ 1", p.norm())));
        }
        if has_mass {
            let m = field(2 * n)?;
            if !(m > 0.0) {
                return Err(input_err(format!("line {line}: mass must be positive, got {m}")));
            }
            masses.push(m);
        }
        points.push(p);
    }
    let seq = if points.is_empty() {
        PointSeq::empty(n)
    } else {
        PointSeq::new(points).map_err(|e| input_err(e.to_string()))?
    };
    Ok(PointInput {
        seq,
        masses: has_mass.then_some(masses),
    })
}

pub fn read_points_file(path: &Path) -> Result<PointInput, CliError> {
    let file = std::fs::File::open(path).map_err(|e| input_err(format!("cannot open {}: {e}", path.display())))?;
    read_points_csv(file).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_points_csv(input: &PointInput) -> String {
    let n = input.seq.dim();
    let mut out = (1..=n).map(|k| format!("re{k},im{k}")).collect::<Vec<_>>().join(",");
    if input.masses.is_some() {
        out.push_str(",mass");
    }
    out.push('\n');
    for (i, p) in input.seq.points().iter().enumerate() {
        let mut row: Vec<String> = p.coords().iter().flat_map(|c| [format!("{:?}", c.re), format!("{:?}", c.im)]).collect();
        if let Some(m) = &input.masses {
            row.push(format!("{:?}", m[i]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn to_seq(n: usize, points: Vec<BallPoint>) -> Result<PointSeq, CliError> {
    if points.is_empty() {
        return Ok(PointSeq::empty(n));
    }
    PointSeq::new(points).map_err(|e| CliError::Config(format!("sequence: {e}")))
}

/// Build the configured sequence in 𝔹ⁿ.
pub fn generate_sequence(spec: &SequenceSpec, n: usize, seed: u64) -> Result<PointInput, CliError> {
    let input = match spec {
        SequenceSpec::Radial { q, count, direction } => {
            if !(*q > 0.0 && *q < 1.0) {
                return Err(CliError::Config(format!("radial sequence needs q ∈ (0,1), got {q}")));
            }
            let dir = match direction {
                None => BallPoint::basis(n, 0),
                Some(d) => {
                    let v = BallPoint::new(d.iter().map(|[re, im]| C64::new(*re, *im)));
                    if v.dim() != n || !(v.norm() > 0.0) || !v.is_finite() {
                        return Err(CliError::Config(format!("direction must be a nonzero vector of C^{n}")));
                    }
                    v.scale_re(1.0 / v.norm())
                }
            };
            let points = (1..=*count).map(|k| dir.scale_re(1.0 - q.powi(k as i32))).collect();
            PointInput::plain(to_seq(n, points)?)
        }
        SequenceSpec::Hyperbolic { count, radius } => {
            if !(*radius > 0.0 && *radius < 1.0) {
                return Err(CliError::Config(format!("hyperbolic sequence needs radius ∈ (0,1), got {radius}")));
            }
            let mut rng = sampling::rng(seed);
            let points = (0..*count).map(|_| sampling::hyperbolic_point(&mut rng, n, *radius)).collect();
            PointInput::plain(to_seq(n, points)?)
        }
        SequenceSpec::Csv { path } => read_points_file(path)?,
        SequenceSpec::Inline { points } => {
            let pts = points
                .iter()
                .map(|p| BallPoint::new(p.iter().map(|[re, im]| C64::new(*re, *im))))
                .collect();
            PointInput::plain(to_seq(n, pts)?)
        }
    };
    if input.seq.dim() != n {
        return Err(CliError::Config(format!(
            "sequence lives in C^{} but the configuration has n = {n}",
            input.seq.dim()
        )));
    }
    Ok(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_formula() {
        let spec = SequenceSpec::Radial { q: 0.5, count: 3, direction: None };
        let got = generate_sequence(&spec, 2, 0).unwrap();
        let re: Vec<f64> = got.seq.points().iter().map(|p| p.coords()[0].re).collect();
        assert_eq!(re, vec![0.5, 0.75, 0.875]);
        assert!(got.seq.points().iter().all(|p| p.coords()[1] == C64::new(0.0, 0.0)));
    }

    #[test]
    fn zero_count_is_empty_and_seeds_repeat() {
        let spec = SequenceSpec::Hyperbolic { count: 0, radius: 0.5 };
        assert!(generate_sequence(&spec, 2, 1).unwrap().seq.is_empty());
        let spec = SequenceSpec::Hyperbolic { count: 5, radius: 0.8 };
        assert_eq!(generate_sequence(&spec, 3, 9).unwrap(), generate_sequence(&spec, 3, 9).unwrap());
        assert_ne!(generate_sequence(&spec, 3, 9).unwrap(), generate_sequence(&spec, 3, 10).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let text = "re1,im1,re2,im2,mass\n0.1,0.2,-0.3,0.0,0.5\n0.0,0.0,0.5,0.5,2\n";
        let input = read_points_csv(text.as_bytes()).unwrap();
        assert_eq!(input.seq.len(), 2);
        assert_eq!(input.masses, Some(vec![0.5, 2.0]));
        assert_eq!(read_points_csv(write_points_csv(&input).as_bytes()).unwrap(), input);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let bad = "re1,im1\n0.1,0.2\n0.3,oops\n";
        let msg = read_points_csv(bad.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
        let outside = "re1,im1\n0.1,0.2\n0.3,0.1\n0.9,0.9\n";
        assert!(read_points_csv(outside.as_bytes()).unwrap_err().to_string().contains("line 4"));
        let short = "re1,im1,re2,im2\n0.1,0.2,0.0,0.0\n0.1,0.2\n";
        assert!(read_points_csv(short.as_bytes()).unwrap_err().to_string().contains("line 3"));
        assert!(read_points_csv("x,y\n".as_bytes()).unwrap_err().to_string().contains("line 1"));
        let empty = read_points_csv("re1,im1\n".as_bytes()).unwrap();
        assert!(empty.seq.is_empty() && empty.seq.dim() == 1);
    }
}
