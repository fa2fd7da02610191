//! Lossless JSON form of a series: one record per monomial with exact
//! fraction strings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fraction_string, parse_fraction, GaussianRational};
use crate::series::{MultiIndex, SeriesRing, TruncatedSeries};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub variables: Vec<String>,
    pub order: u32,
    pub terms: Vec<TermRecord>,
}

impl SeriesDocument {
    pub fn from_series(s: &TruncatedSeries) -> Self {
        Self {
            variables: s.ring().names().to_vec(),
            order: s.order(),
            terms: s
                .terms()
                .map(|(k, c)| TermRecord {
                    exponents: k.exponents(),
                    re: fraction_string(&c.re),
                    im: fraction_string(&c.im),
                })
                .collect(),
        }
    }

    pub fn to_series(&self) -> Result<TruncatedSeries> {
        let ring = SeriesRing::build(self.variables.clone(), self.order)?;
        let mut out = TruncatedSeries::zero(&ring);
        for t in &self.terms {
            if t.exponents.len() != ring.nvars() {
                return Err(Error::Contract(format!(
                    "term has {} exponents for {} variables",
                    t.exponents.len(),
                    ring.nvars()
                )));
            }
            let idx = MultiIndex::new(&t.exponents);
            if idx.degree() > ring.order() {
                return Err(Error::Contract(format!("term of degree {} above the order", idx.degree())));
            }
            let frac = |s: &str| parse_fraction(s).ok_or_else(|| Error::Contract(format!("bad fraction `{s}`")));
            out.add_term(idx, &GaussianRational::new(frac(&t.re)?, frac(&t.im)?));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Contract(format!("malformed series document: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let r = SeriesRing::new(&["z1", "w", "zeta1", "omega"], 5).unwrap();
        let s = TruncatedSeries::from_terms(
            &r,
            [
                (vec![1, 0, 1, 0], GaussianRational::from_fracs(-3, 7, 0, 1)),
                (vec![0, 1, 0, 0], GaussianRational::from_fracs(0, 1, 1, 2)),
                (vec![2, 0, 0, 3], GaussianRational::from_fracs(5, 1, -11, 13)),
            ],
        )
        .unwrap();
        let doc = SeriesDocument::from_series(&s);
        let back = SeriesDocument::from_json(&doc.to_json()).unwrap().to_series().unwrap();
        assert_eq!(back, s);
        assert!(doc.terms.iter().any(|t| t.re == "-3/7" && t.im == "0/1"));
    }
}
