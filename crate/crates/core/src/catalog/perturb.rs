//! Controlled modifications of scenarios that break selected conditions.

use std::fmt;
use std::str::FromStr;

use serde_json::json;

use super::{hermitian, CatalogError, GenDoc, GroupDoc, ScenarioDoc};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    /// G2 := G1.
    B,
    /// P2 := a place off the base field.
    C,
    /// H := the 2-part of the group generated by G1 and G2.
    D,
    /// Hermitian only: H := a diagonal group not normalized by G1.
    E,
    /// H := the group generated by the conjugating map.
    F,
}

impl FromStr for Perturbation {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "b" => Perturbation::B,
            "c" => Perturbation::C,
            "d" => Perturbation::D,
            "e" => Perturbation::E,
            "f" => Perturbation::F,
            _ => {
                return Err(CatalogError::Invalid(format!(
                    "unknown perturbation `{s}` (expected one of b, c, d, e, f)"
                )))
            }
        })
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Perturbation::B => "b",
            Perturbation::C => "c",
            Perturbation::D => "d",
            Perturbation::E => "e",
            Perturbation::F => "f",
        };
        f.write_str(s)
    }
}

fn drop_quotient_expectations(doc: &mut ScenarioDoc) {
    doc.model_check = None;
    doc.expect.h_order = None;
}

pub fn perturb(mut doc: ScenarioDoc, kind: Perturbation) -> Result<ScenarioDoc, CatalogError> {
    match kind {
        Perturbation::B => {
            doc.g2 = GroupDoc {
                same_as_g1: true,
                ..GroupDoc::default()
            };
            doc.w2 = Some(doc.w1.clone());
            doc.cross_checks.clear();
        }
        Perturbation::C => {
            doc.p2 = "@generic".into();
            doc.cross_checks.clear();
        }
        Perturbation::D => {
            doc.h = Some(GroupDoc {
                two_part_of_join: true,
                ..GroupDoc::default()
            });
            drop_quotient_expectations(&mut doc);
        }
        Perturbation::E => {
            if doc.name != "hermitian" {
                return Err(CatalogError::Invalid(
                    "perturbation e is defined for the hermitian family".into(),
                ));
            }
            let q = doc.params["q"] as u64;
            let base = hermitian(q, 1)?;
            let mut field = base.field;
            field.constants.push(format!("b: primitive {}", q * q - 1));
            let e: GenDoc = serde_json::from_value(json!({
                "linear": [["b^(q+1)", "0", "0"], ["0", "b", "0"], ["0", "0", "1"]],
                "label": "eta"
            }))
            .expect("well formed");
            doc.field = field;
            doc.h = Some(GroupDoc {
                generators: vec![e],
                ..GroupDoc::default()
            });
            drop_quotient_expectations(&mut doc);
        }
        Perturbation::F => {
            if !doc.maps.contains_key("xi") {
                return Err(CatalogError::Invalid(
                    "perturbation f needs a conjugating map `xi`".into(),
                ));
            }
            doc.h = Some(GroupDoc {
                generators: vec![GenDoc::Named("xi".into())],
                ..GroupDoc::default()
            });
            drop_quotient_expectations(&mut doc);
        }
    }
    doc.flags.push(format!("perturbation-{kind}"));
    Ok(doc)
}
