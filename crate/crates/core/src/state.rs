//! Flat positional state descriptors for the command line.
//!
//! ```text
//! coherent:RE[,IM]
//! fock:N
//! cat:even|odd:RE[,IM]
//! sqvac:RE[,IM]
//! pasv:M[:RE[,IM]]      squeezing defaults to 0.1
//! file:PATH             JSON {"amplitudes": [[re, im], ...]}
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::{
    cat_state, coherent_state, fock_state, photon_added_squeezed, squeezed_coherent, CatParity,
    FockVector, GaussianPureState, Truncation,
};

/// Squeezing used by `pasv:M` when none is given.
pub const DEFAULT_PASV_XI: f64 = 0.1;

/// Truncation tail for states built from descriptors. A tail of mass `t`
/// shifts `P_w` by up to about `2√t·max|c_{w,n}|`, so this keeps the cut
/// near rounding level.
pub const STATE_EPS: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq)]
pub enum StateDescriptor {
    Coherent(Complex64),
    Fock(usize),
    Cat(CatParity, Complex64),
    SqueezedVacuum(Complex64),
    PhotonAddedSqueezed { m: usize, xi: Complex64 },
    File(PathBuf),
}

impl StateDescriptor {
    pub fn build(&self) -> Result<FockVector> {
        let trunc = Truncation::auto().with_eps(STATE_EPS);
        match self {
            StateDescriptor::Coherent(g) => coherent_state(*g, trunc),
            StateDescriptor::Fock(n) => fock_state(*n, *n),
            StateDescriptor::Cat(p, g) => cat_state(*g, *p, trunc),
            StateDescriptor::SqueezedVacuum(xi) => {
                squeezed_coherent(&GaussianPureState::squeezed_vacuum(*xi)?, trunc)
            }
            StateDescriptor::PhotonAddedSqueezed { m, xi } => photon_added_squeezed(*m, *xi, trunc),
            StateDescriptor::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let raw: FockVector = serde_json::from_str(&text)?;
                FockVector::normalized_from(raw.amplitudes().to_vec())
            }
        }
    }

    /// Whether the described state is Gaussian (and hence inside the
    /// Gaussian hull); `None` for file states.
    pub fn is_gaussian(&self) -> Option<bool> {
        match self {
            StateDescriptor::Coherent(_) | StateDescriptor::SqueezedVacuum(_) => Some(true),
            StateDescriptor::Fock(n) => Some(*n == 0),
            StateDescriptor::PhotonAddedSqueezed { m, .. } => Some(*m == 0),
            StateDescriptor::Cat(..) => Some(false),
            StateDescriptor::File(_) => None,
        }
    }
}

fn fmt_complex(f: &mut fmt::Formatter<'_>, z: Complex64) -> fmt::Result {
    write!(f, "{},{}", z.re, z.im)
}

impl fmt::Display for StateDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateDescriptor::Coherent(g) => {
                f.write_str("coherent:")?;
                fmt_complex(f, *g)
            }
            StateDescriptor::Fock(n) => write!(f, "fock:{n}"),
            StateDescriptor::Cat(p, g) => {
                let p = match p {
                    CatParity::Even => "even",
                    CatParity::Odd => "odd",
                };
                write!(f, "cat:{p}:")?;
                fmt_complex(f, *g)
            }
            StateDescriptor::SqueezedVacuum(xi) => {
                f.write_str("sqvac:")?;
                fmt_complex(f, *xi)
            }
            StateDescriptor::PhotonAddedSqueezed { m, xi } => {
                write!(f, "pasv:{m}:")?;
                fmt_complex(f, *xi)
            }
            StateDescriptor::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Field of a descriptor with its byte offset, for error positions.
struct Field<'a> {
    text: &'a str,
    at: usize,
}

fn fail<T>(position: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        position,
        message: message.into(),
    })
}

fn parse_real(f: &Field<'_>) -> Result<f64> {
    match f.text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => fail(
            f.at,
            format!("expected a finite number, found {:?}", f.text),
        ),
    }
}

fn parse_complex(f: &Field<'_>) -> Result<Complex64> {
    let mut parts = f.text.splitn(2, ',');
    let re_text = parts.next().unwrap_or("");
    let re = parse_real(&Field {
        text: re_text,
        at: f.at,
    })?;
    let im = match parts.next() {
        Some(t) => parse_real(&Field {
            text: t,
            at: f.at + re_text.len() + 1,
        })?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

fn parse_count(f: &Field<'_>) -> Result<usize> {
    f.text.trim().parse::<usize>().or_else(|_| {
        fail(
            f.at,
            format!("expected a non-negative integer, found {:?}", f.text),
        )
    })
}

impl FromStr for StateDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return fail(5, "missing path");
            }
            return Ok(StateDescriptor::File(PathBuf::from(path)));
        }
        let mut fields = Vec::new();
        let mut at = 0;
        for text in s.split(':') {
            fields.push(Field { text, at });
            at += text.len() + 1;
        }
        let kind = fields[0].text;
        let arity = |lo: usize, hi: usize| -> Result<()> {
            let n = fields.len() - 1;
            if n < lo {
                return fail(
                    s.len(),
                    format!("{kind} needs {lo} field(s) after the kind"),
                );
            }
            if n > hi {
                return fail(fields[hi + 1].at, format!("unexpected field for {kind}"));
            }
            Ok(())
        };
        match kind {
            "coherent" => {
                arity(1, 1)?;
                Ok(StateDescriptor::Coherent(parse_complex(&fields[1])?))
            }
            "fock" => {
                arity(1, 1)?;
                Ok(StateDescriptor::Fock(parse_count(&fields[1])?))
            }
            "cat" => {
                arity(2, 2)?;
                let parity = match fields[1].text {
                    "even" => CatParity::Even,
                    "odd" => CatParity::Odd,
                    other => {
                        return fail(
                            fields[1].at,
                            format!("expected even or odd, found {other:?}"),
                        )
                    }
                };
                Ok(StateDescriptor::Cat(parity, parse_complex(&fields[2])?))
            }
            "sqvac" => {
                arity(1, 1)?;
                Ok(StateDescriptor::SqueezedVacuum(parse_complex(&fields[1])?))
            }
            "pasv" => {
                arity(1, 2)?;
                let m = parse_count(&fields[1])?;
                let xi = match fields.get(2) {
                    Some(f) => parse_complex(f)?,
                    None => Complex64::new(DEFAULT_PASV_XI, 0.0),
                };
                Ok(StateDescriptor::PhotonAddedSqueezed { m, xi })
            }
            other => fail(0, format!("unknown state kind {other:?}")),
        }
    }
}

impl Serialize for StateDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
