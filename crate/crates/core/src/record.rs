//! Stiffness records: one JSON object per tensor, optionally line-delimited.

use crate::error::{Error, Result};
use crate::tensor4::{ElasticTensor4, MandelMatrix};
use serde::{Deserialize, Serialize};

pub const MANDEL_BASIS: &str = "mandel";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StiffnessRecord {
    /// Row-major Mandel matrix.
    pub mandel: Vec<f64>,
    pub basis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Directional-modulus samples as `[dx, dy, dz, value]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<Vec<[f64; 4]>>,
}

impl StiffnessRecord {
    pub fn from_tensor(c: &ElasticTensor4) -> Self {
        Self {
            mandel: c.to_mandel().to_row_vec(),
            basis: MANDEL_BASIS.into(),
            relative_density: None,
            name: None,
            radius: None,
            surface: None,
        }
    }

    pub fn mandel_matrix(&self) -> Result<MandelMatrix> {
        if self.basis != MANDEL_BASIS {
            return Err(Error::InvalidArgument(format!(
                "unsupported basis '{}'",
                self.basis
            )));
        }
        if self.mandel.len() != 36 {
            return Err(Error::InvalidArgument(format!(
                "expected 36 Mandel entries, found {}",
                self.mandel.len()
            )));
        }
        MandelMatrix::from_row_slice(&self.mandel)
    }

    pub fn tensor(&self) -> Result<ElasticTensor4> {
        Ok(self.mandel_matrix()?.to_tensor())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        rec.mandel_matrix()?;
        Ok(rec)
    }
}

/// Parses one record per non-blank line. Also accepts a single record that
/// spans several lines (pretty-printed JSON).
pub fn parse_records(text: &str) -> Result<Vec<StiffnessRecord>> {
    let trimmed = text.trim();
    if is_single_object(trimmed) {
        return Ok(vec![StiffnessRecord::from_json(trimmed)?]);
    }
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec = StiffnessRecord::from_json(line).map_err(|e| match e {
            Error::Parse { reason, .. } => Error::Parse {
                line: k + 1,
                reason,
            },
            other => Error::Parse {
                line: k + 1,
                reason: other.to_string(),
            },
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn is_single_object(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text).is_ok_and(|v| v.is_object())
}

pub fn write_records(records: &[StiffnessRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Mat6;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_record(rng: &mut ChaCha8Rng) -> StiffnessRecord {
        let a = Mat6::from_fn(|_, _| {
            rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-12..4))
        });
        let mut r = StiffnessRecord::from_tensor(
            &MandelMatrix::new(a + a.transpose()).unwrap().to_tensor(),
        );
        r.relative_density = Some(rng.random());
        r
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let r = random_record(&mut rng);
            let back = StiffnessRecord::from_json(&r.to_json()).unwrap();
            for (a, b) in r.mandel.iter().zip(&back.mandel) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
            assert_eq!(back, r);
        }
    }

    #[test]
    fn line_delimited_and_single_object() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let recs: Vec<_> = (0..3).map(|_| random_record(&mut rng)).collect();
        assert_eq!(parse_records(&write_records(&recs)).unwrap(), recs);
        let pretty = serde_json::to_string_pretty(&recs[0]).unwrap();
        assert_eq!(parse_records(&pretty).unwrap(), vec![recs[0].clone()]);
    }

    #[test]
    fn malformed_records_rejected() {
        let good = StiffnessRecord::from_tensor(&ElasticTensor4::isotropic(1.0, 1.0)).to_json();
        let short = good.replacen("[3.0,", "[", 1);
        assert!(StiffnessRecord::from_json(&short).is_err());
        assert!(StiffnessRecord::from_json(&good.replace("mandel\"}", "voigt\"}")).is_err());
        assert!(StiffnessRecord::from_json("{\"mandel\": 3}").is_err());
        let text = format!("{good}\nnot json\n");
        assert!(matches!(
            parse_records(&text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut r = StiffnessRecord::from_tensor(&ElasticTensor4::isotropic(1.0, 1.0));
        r.mandel[1] += 1.0;
        assert!(matches!(
            StiffnessRecord::from_json(&r.to_json()),
            Err(Error::Asymmetric { .. })
        ));
    }
}
