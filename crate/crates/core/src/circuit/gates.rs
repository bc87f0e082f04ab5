//! Gate kinds and their unitary matrices.
//!
//! Two-qubit matrices are indexed by `2 * b0 + b1`, where `b0` is the bit of
//! the first listed qubit.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    X12,
    Y12,
    Hz12,
    Rz,
    Cz,
    Fsim,
    /// Explicit 2×2 matrix.
    U1,
    /// Explicit 4×4 matrix.
    U2,
}

impl GateKind {
    pub fn from_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "x_1_2" => GateKind::X12,
            "y_1_2" => GateKind::Y12,
            "hz_1_2" => GateKind::Hz12,
            "rz" => GateKind::Rz,
            "cz" => GateKind::Cz,
            "fsim" => GateKind::Fsim,
            "u1" => GateKind::U1,
            "u2" => GateKind::U2,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::X12 => "x_1_2",
            GateKind::Y12 => "y_1_2",
            GateKind::Hz12 => "hz_1_2",
            GateKind::Rz => "rz",
            GateKind::Cz => "cz",
            GateKind::Fsim => "fsim",
            GateKind::U1 => "u1",
            GateKind::U2 => "u2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cz | GateKind::Fsim | GateKind::U2 => 2,
            _ => 1,
        }
    }

    /// Number of real parameters the gate takes in the circuit file.
    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rz => 1,
            GateKind::Fsim => 2,
            GateKind::U1 => 8,
            GateKind::U2 => 32,
            _ => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major matrix for `kind` with the given parameters. Parameter counts
/// must already be validated.
pub fn matrix(kind: GateKind, params: &[f64]) -> Vec<C64> {
    match kind {
        GateKind::H => vec![
            c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(-FRAC_1_SQRT_2, 0.0),
        ],
        GateKind::X => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        GateKind::X12 => vec![c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)],
        GateKind::Y12 => vec![c(0.5, 0.5), c(-0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5)],
        GateKind::Hz12 => vec![c(0.5, 0.5), c(0.0, -FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0), c(0.5, 0.5)],
        GateKind::Rz => {
            let half = params[0] / 2.0;
            vec![
                C64::from_polar(1.0, -half),
                c(0.0, 0.0),
                c(0.0, 0.0),
                C64::from_polar(1.0, half),
            ]
        }
        GateKind::Cz => {
            let mut m = vec![c(0.0, 0.0); 16];
            m[0] = c(1.0, 0.0);
            m[5] = c(1.0, 0.0);
            m[10] = c(1.0, 0.0);
            m[15] = c(-1.0, 0.0);
            m
        }
        GateKind::Fsim => {
            let (theta, phi) = (params[0], params[1]);
            let mut m = vec![c(0.0, 0.0); 16];
            m[0] = c(1.0, 0.0);
            m[5] = c(theta.cos(), 0.0);
            m[6] = c(0.0, -theta.sin());
            m[9] = c(0.0, -theta.sin());
            m[10] = c(theta.cos(), 0.0);
            m[15] = C64::from_polar(1.0, -phi);
            m
        }
        GateKind::U1 | GateKind::U2 => params.chunks(2).map(|p| c(p[0], p[1])).collect(),
    }
}

/// Largest entry of `|M†M − I|`.
pub fn unitarity_deviation(m: &[C64]) -> f64 {
    let d = (m.len() as f64).sqrt() as usize;
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += m[k * d + i].conj() * m[k * d + j];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

pub fn is_diagonal(m: &[C64]) -> bool {
    let d = (m.len() as f64).sqrt() as usize;
    (0..d).all(|i| (0..d).all(|j| i == j || m[i * d + j] == C64::new(0.0, 0.0)))
}
