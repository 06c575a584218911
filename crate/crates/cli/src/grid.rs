//! Plain-text grids: `lo:step:hi`, `lo:*ratio:hi`, comma lists, single values.

use serde::{Deserialize, Serialize};

/// Grid given either as text or as an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Text(String),
    List(Vec<f64>),
}

impl GridValue {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridValue::Text(s) => parse_grid(s),
            GridValue::List(v) if v.is_empty() => Err("empty grid".into()),
            GridValue::List(v) => Ok(v.clone()),
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
}

/// Inclusive grid; the end point is kept when it is hit to within 1e-9 of a step.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
        [lo, step, hi] => {
            let (lo, hi) = (number(lo)?, number(hi)?);
            if let Some(ratio) = step.trim().strip_prefix('*') {
                let ratio = number(ratio)?;
                if !(ratio > 1.0 && lo > 0.0 && hi >= lo) {
                    return Err(format!("geometric grid {text:?} needs 0 < lo <= hi and ratio > 1"));
                }
                let count = ((hi / lo).ln() / ratio.ln() + 1e-9).floor() as usize;
                (0..=count).map(|i| lo * ratio.powi(i as i32)).collect()
            } else {
                let step = number(step)?;
                if !(step > 0.0 && hi >= lo) {
                    return Err(format!("linear grid {text:?} needs lo <= hi and step > 0"));
                }
                let count = ((hi - lo) / step + 1e-9).floor() as usize;
                (0..=count).map(|i| lo + i as f64 * step).collect()
            }
        }
        _ => return Err(format!("cannot read grid {text:?}")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(format!("grid {text:?} is empty or not finite"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_geometric() {
        assert_eq!(parse_grid("-2:0.25:-1.5").unwrap(), vec![-2.0, -1.75, -1.5]);
        let g = parse_grid("10:*10:10000").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 1e4).abs() < 1e-9);
        assert_eq!(parse_grid("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
    }

    #[test]
    fn malformed() {
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("0:*2:8").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
