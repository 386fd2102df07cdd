use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{neg_p_log2_p, MultiPmf, PMF_TOL};
use crate::error::{Error, Result};

/// A side-information symbol: an abstract label, optionally numeric.
#[derive(Clone, Debug, PartialEq)]
pub struct XSymbol {
    pub label: String,
    pub value: Option<f64>,
}

impl XSymbol {
    pub fn label(label: impl Into<String>) -> Self {
        XSymbol {
            label: label.into(),
            value: None,
        }
    }

    pub fn numeric(value: f64) -> Self {
        XSymbol {
            label: format!("{value}"),
            value: Some(value),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum XSymbolRepr {
    Number(f64),
    Label(String),
}

impl Serialize for XSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.value {
            Some(v) => XSymbolRepr::Number(v).serialize(s),
            None => XSymbolRepr::Label(self.label.clone()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for XSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match XSymbolRepr::deserialize(d)? {
            XSymbolRepr::Number(v) => XSymbol::numeric(v),
            XSymbolRepr::Label(l) => XSymbol::label(l),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PmfRepr {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
struct FiniteJointRepr {
    x_alphabet: Vec<XSymbol>,
    y_alphabet: Vec<f64>,
    pmf: PmfRepr,
}

/// Joint pmf `p(x, y)` over a finite side-information alphabet and a finite
/// numeric output alphabet. Stored row-major (`x` major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteJointRepr", into = "FiniteJointRepr")]
pub struct FiniteJoint {
    x_alphabet: Vec<XSymbol>,
    y_alphabet: Vec<f64>,
    pmf: Vec<f64>,
}

impl TryFrom<FiniteJointRepr> for FiniteJoint {
    type Error = Error;

    fn try_from(r: FiniteJointRepr) -> Result<Self> {
        let pmf = match r.pmf {
            PmfRepr::Flat(v) => v,
            PmfRepr::Rows(rows) => {
                if rows.len() != r.x_alphabet.len()
                    || rows.iter().any(|row| row.len() != r.y_alphabet.len())
                {
                    return Err(Error::validation("pmf rows do not match the alphabets"));
                }
                rows.concat()
            }
        };
        FiniteJoint::new(r.x_alphabet, r.y_alphabet, pmf)
    }
}

impl From<FiniteJoint> for FiniteJointRepr {
    fn from(j: FiniteJoint) -> Self {
        FiniteJointRepr {
            x_alphabet: j.x_alphabet,
            y_alphabet: j.y_alphabet,
            pmf: PmfRepr::Flat(j.pmf),
        }
    }
}

impl FiniteJoint {
    pub fn new(x_alphabet: Vec<XSymbol>, y_alphabet: Vec<f64>, pmf: Vec<f64>) -> Result<Self> {
        let (nx, ny) = (x_alphabet.len(), y_alphabet.len());
        if nx == 0 || ny == 0 {
            return Err(Error::validation("alphabets must be nonempty"));
        }
        if pmf.len() != nx * ny {
            return Err(Error::validation(format!(
                "pmf has {} entries, expected {nx} x {ny}",
                pmf.len()
            )));
        }
        if y_alphabet.iter().any(|y| !y.is_finite()) {
            return Err(Error::validation("output alphabet values must be finite"));
        }
        if let Some(p) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::validation(format!("invalid probability {p}")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::validation(format!("pmf sums to {total}, not 1")));
        }
        Ok(FiniteJoint {
            x_alphabet,
            y_alphabet,
            pmf,
        })
    }

    /// Build from rows `p(x, ·)` with labels `x0, x1, …`.
    pub fn from_rows(y_alphabet: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != y_alphabet.len()) {
            return Err(Error::validation("row length does not match output alphabet"));
        }
        let xs = (0..rows.len()).map(|i| XSymbol::label(format!("x{i}"))).collect();
        FiniteJoint::new(xs, y_alphabet, rows.concat())
    }

    /// A joint with a single side-information symbol (no side information).
    pub fn single_source(y_alphabet: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        FiniteJoint::new(vec![XSymbol::label("x0")], y_alphabet, p)
    }

    pub fn x_alphabet(&self) -> &[XSymbol] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[f64] {
        &self.y_alphabet
    }

    pub fn nx(&self) -> usize {
        self.x_alphabet.len()
    }

    pub fn ny(&self) -> usize {
        self.y_alphabet.len()
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.pmf[x * self.ny() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let ny = self.ny();
        &self.pmf[x * ny..(x + 1) * ny]
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn p_x(&self) -> Vec<f64> {
        (0..self.nx()).map(|x| self.row(x).iter().sum()).collect()
    }

    pub fn p_y(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny()];
        for x in 0..self.nx() {
            for (o, &p) in out.iter_mut().zip(self.row(x)) {
                *o += p;
            }
        }
        out
    }

    /// `p(y | x)`; `None` when `p(x) = 0`.
    pub fn conditional(&self, x: usize) -> Option<Vec<f64>> {
        let row = self.row(x);
        let px: f64 = row.iter().sum();
        (px > 0.0).then(|| row.iter().map(|p| p / px).collect())
    }

    /// Collapse the side information: the same outputs with a single `x`.
    pub fn pooled(&self) -> FiniteJoint {
        FiniteJoint {
            x_alphabet: vec![XSymbol::label("pooled")],
            y_alphabet: self.y_alphabet.clone(),
            pmf: self.p_y(),
        }
    }

    /// Same joint with every output value shifted by `c`.
    pub fn shifted(&self, c: f64) -> FiniteJoint {
        FiniteJoint {
            x_alphabet: self.x_alphabet.clone(),
            y_alphabet: self.y_alphabet.iter().map(|y| y + c).collect(),
            pmf: self.pmf.clone(),
        }
    }

    /// Same alphabets (labels and values) as `other`.
    pub fn same_alphabets(&self, other: &FiniteJoint) -> bool {
        self.x_alphabet == other.x_alphabet && self.y_alphabet == other.y_alphabet
    }

    /// View as a named multivariate pmf over `X` and `Y` (symbol indices).
    pub fn to_multi(&self) -> MultiPmf {
        let mut m = MultiPmf::new(&["X", "Y"]).expect("distinct names");
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let p = self.p(x, y);
                if p > 0.0 {
                    m.add(&[x as u32, y as u32], p).expect("arity 2");
                }
            }
        }
        m
    }

    /// Extend with a reproduction variable `Yhat` drawn from the channel
    /// `q(yhat | x, y)`; `channel(x, y)` returns the row over reproductions.
    pub fn extend_with_channel<F>(&self, mut channel: F) -> Result<MultiPmf>
    where
        F: FnMut(usize, usize) -> Vec<f64>,
    {
        let mut m = MultiPmf::new(&["X", "Y", "Yhat"])?;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let row = channel(x, y);
                let s: f64 = row.iter().sum();
                if row.iter().any(|q| !(q.is_finite() && *q >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::usage(format!(
                        "channel row for (x={x}, y={y}) is not a distribution"
                    )));
                }
                let p = self.p(x, y);
                if p == 0.0 {
                    continue;
                }
                for (k, &q) in row.iter().enumerate() {
                    if q > 0.0 {
                        m.add(&[x as u32, y as u32, k as u32], p * q)?;
                    }
                }
            }
        }
        m.validate()?;
        Ok(m)
    }
}

/// Which entropy of a [`FiniteJoint`] to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    X,
    Y,
    Joint,
    YGivenX,
    XGivenY,
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "X" => Ok(Selector::X),
            "Y" => Ok(Selector::Y),
            "X,Y" | "Y,X" | "XY" => Ok(Selector::Joint),
            "Y|X" => Ok(Selector::YGivenX),
            "X|Y" => Ok(Selector::XGivenY),
            other => Err(Error::usage(format!(
                "entropy selector {other:?} references a variable other than X and Y"
            ))),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selector::X => "X",
            Selector::Y => "Y",
            Selector::Joint => "X,Y",
            Selector::YGivenX => "Y|X",
            Selector::XGivenY => "X|Y",
        })
    }
}

/// Entropy (or conditional entropy) in bits, by direct summation.
pub fn entropy_bits(dist: &FiniteJoint, which: Selector) -> f64 {
    match which {
        Selector::X => dist.p_x().into_iter().map(neg_p_log2_p).sum(),
        Selector::Y => dist.p_y().into_iter().map(neg_p_log2_p).sum(),
        Selector::Joint => dist.pmf.iter().copied().map(neg_p_log2_p).sum(),
        Selector::YGivenX => {
            let px = dist.p_x();
            let mut h = 0.0;
            for (x, &mx) in px.iter().enumerate() {
                for &p in dist.row(x) {
                    if p > 0.0 {
                        h -= p * (p / mx).log2();
                    }
                }
            }
            h
        }
        Selector::XGivenY => {
            let py = dist.p_y();
            let mut h = 0.0;
            for x in 0..dist.nx() {
                for (y, &p) in dist.row(x).iter().enumerate() {
                    if p > 0.0 {
                        h -= p * (p / py[y]).log2();
                    }
                }
            }
            h
        }
    }
}

/// `I(X; Y)` in bits.
pub fn mutual_information_bits(dist: &FiniteJoint) -> f64 {
    let (px, py) = (dist.p_x(), dist.p_y());
    let mut i = 0.0;
    for (x, &mx) in px.iter().enumerate() {
        for (y, &p) in dist.row(x).iter().enumerate() {
            if p > 0.0 {
                i += p * (p / (mx * py[y])).log2();
            }
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym22() -> FiniteJoint {
        FiniteJoint::from_rows(vec![0.0, 1.0], &[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    #[test]
    fn uniform_marginal_is_one_bit() {
        let j = FiniteJoint::from_rows(vec![0.0, 1.0], &[vec![0.25, 0.25], vec![0.25, 0.25]])
            .unwrap();
        assert!((entropy_bits(&j, Selector::Y) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn functional_dependence_has_zero_conditional_entropy() {
        let j = FiniteJoint::from_rows(
            vec![0.0, 1.0, 2.0],
            &[vec![0.0, 0.3, 0.0], vec![0.5, 0.0, 0.0], vec![0.0, 0.0, 0.2]],
        )
        .unwrap();
        assert_eq!(entropy_bits(&j, Selector::YGivenX), 0.0);
    }

    #[test]
    fn conditional_entropy_two_summation_orders() {
        let j = sym22();
        let direct = entropy_bits(&j, Selector::YGivenX);
        // column-major re-summation via H(X,Y) - H(X)
        let mut hxy = 0.0;
        for y in 0..2 {
            for x in 0..2 {
                hxy += neg_p_log2_p(j.p(x, y));
            }
        }
        let hx: f64 = [0.5f64, 0.5].iter().map(|&p| neg_p_log2_p(p)).sum();
        assert!((direct - (hxy - hx)).abs() < 1e-14);
        // and the binary entropy of 0.2
        let h = -(0.2f64 * 0.2f64.log2() + 0.8 * 0.8f64.log2());
        assert!((direct - h).abs() < 1e-14);
    }

    #[test]
    fn independent_has_zero_mi() {
        let j = FiniteJoint::from_rows(
            vec![0.0, 1.0, 2.0],
            &[vec![0.06, 0.12, 0.12], vec![0.14, 0.28, 0.28]],
        )
        .unwrap();
        assert!(mutual_information_bits(&j).abs() < 1e-15);
    }

    #[test]
    fn selector_parsing() {
        assert_eq!("Y|X".parse::<Selector>().unwrap(), Selector::YGivenX);
        assert_eq!(" X , Y ".parse::<Selector>().unwrap(), Selector::Joint);
        assert!(matches!("Z|X".parse::<Selector>(), Err(Error::Usage(_))));
    }

    #[test]
    fn json_round_trip_and_nested_rows() {
        let j = sym22();
        let s = serde_json::to_string(&j).unwrap();
        let back: FiniteJoint = serde_json::from_str(&s).unwrap();
        assert_eq!(j, back);
        let nested = r#"{"x_alphabet":["a", 2.5],"y_alphabet":[0,1],"pmf":[[0.4,0.1],[0.1,0.4]]}"#;
        let k: FiniteJoint = serde_json::from_str(nested).unwrap();
        assert_eq!(k.x_alphabet()[1].value, Some(2.5));
        assert_eq!(k.p(1, 1), 0.4);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(FiniteJoint::from_rows(vec![0.0, 1.0], &[vec![0.5, 0.6]]).is_err());
        assert!(FiniteJoint::from_rows(vec![0.0, 1.0], &[vec![1.2, -0.2]]).is_err());
    }

    #[test]
    fn copy_channel_mi_equals_conditional_entropy() {
        let j = sym22();
        let ext = j
            .extend_with_channel(|_, y| {
                let mut r = vec![0.0; 2];
                r[y] = 1.0;
                r
            })
            .unwrap();
        let i = ext.mutual_information(&["Y"], &["Yhat"], &["X"]).unwrap();
        assert!((i - entropy_bits(&j, Selector::YGivenX)).abs() < 1e-14);
    }
}
