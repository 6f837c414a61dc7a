//! Built-in target functions, addressed by id on the command line.

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct Expression {
    pub id: String,
    pub dim: usize,
    pub var_names: Vec<String>,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `c2 x^2 + c1 x + c0`.
    Quadratic(f64, f64, f64),
    /// `s x + c`.
    Linear(f64, f64),
    Cube,
    Sin,
    NewtonMa,
}

/// Ids accepted by [`lookup`]; `quad_*` and `linear_*` take their coefficients inline.
pub const KNOWN: &[&str] = &["quad_<c2>_<c1>_<c0>", "linear_<s>_<c>", "square", "cube", "sin", "newton_ma"];

pub fn lookup(id: &str) -> Result<Expression> {
    let one = |kind| Expression { id: id.to_owned(), dim: 1, var_names: vec!["x".into()], kind };
    let coeffs = |rest: &str, n: usize| -> Result<Vec<f64>> {
        let parts: Vec<&str> = rest.split('_').collect();
        if parts.len() != n {
            return Err(unknown(id));
        }
        parts.iter().map(|p| p.parse::<f64>().map_err(|_| unknown(id))).collect()
    };
    match id {
        "square" => Ok(one(Kind::Quadratic(1.0, 0.0, 0.0))),
        "cube" => Ok(one(Kind::Cube)),
        "sin" => Ok(one(Kind::Sin)),
        "newton_ma" => Ok(Expression { id: id.to_owned(), dim: 2, var_names: vec!["m".into(), "a".into()], kind: Kind::NewtonMa }),
        _ => {
            if let Some(rest) = id.strip_prefix("quad_") {
                let c = coeffs(rest, 3)?;
                Ok(one(Kind::Quadratic(c[0], c[1], c[2])))
            } else if let Some(rest) = id.strip_prefix("linear_") {
                let c = coeffs(rest, 2)?;
                Ok(one(Kind::Linear(c[0], c[1])))
            } else {
                Err(unknown(id))
            }
        }
    }
}

fn unknown(id: &str) -> CliError {
    CliError::usage(format!("unknown expression '{id}' (known: {})", KNOWN.join(", ")))
}

impl Expression {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            Kind::Quadratic(a, b, c) => (a * x[0] + b) * x[0] + c,
            Kind::Linear(s, c) => s * x[0] + c,
            Kind::Cube => x[0] * x[0] * x[0],
            Kind::Sin => x[0].sin(),
            Kind::NewtonMa => x[0] * x[1],
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::Quadratic(a, b, _) => vec![2.0 * a * x[0] + b],
            Kind::Linear(s, _) => vec![s],
            Kind::Cube => vec![3.0 * x[0] * x[0]],
            Kind::Sin => vec![x[0].cos()],
            Kind::NewtonMa => vec![x[1], x[0]],
        }
    }

    pub fn eval1(&self, x: f64) -> f64 {
        self.eval(&[x])
    }

    pub fn derivative1(&self, x: f64) -> f64 {
        self.gradient(&[x])[0]
    }

    pub fn require_dim(&self, n: usize) -> Result<()> {
        if self.dim != n {
            return Err(CliError::usage(format!("expression '{}' takes {} inputs, got {n}", self.id, self.dim)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inline_coefficients() {
        let e = lookup("quad_0.5_-2_1").unwrap();
        assert_eq!(e.eval1(2.0), 2.0 - 4.0 + 1.0);
        assert_eq!(e.derivative1(2.0), 2.0 - 2.0);
        let l = lookup("linear_3_1").unwrap();
        assert_eq!(l.eval1(2.0), 7.0);
        assert_eq!(lookup("newton_ma").unwrap().gradient(&[2.0, 5.0]), vec![5.0, 2.0]);
    }

    #[test]
    fn rejects_unknown() {
        for id in ["quad_1_2", "linear_a_b", "tan", ""] {
            assert!(matches!(lookup(id), Err(CliError::Usage(_))), "{id}");
        }
    }
}
