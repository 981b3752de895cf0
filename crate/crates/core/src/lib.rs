//! Verification of Galois-point criteria on curves over finite fields.

pub mod autos;
pub mod catalog;
pub mod criterion;
pub mod divisor;
pub mod expr;
pub mod geometry;
pub mod gf;
pub mod pipeline;

use thiserror::Error;

/// Any failure that prevents a verdict.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Gf(#[from] gf::GfError),
    #[error(transparent)]
    Expr(#[from] expr::ExprError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Auto(#[from] autos::AutoError),
    #[error(transparent)]
    Criterion(#[from] criterion::CriterionError),
    #[error(transparent)]
    Catalog(#[from] catalog::CatalogError),
}

fn gf_kind(e: &gf::GfError) -> &'static str {
    use gf::GfError::*;
    match e {
        NotPrime(_) => "NotPrime",
        NoDegrees => "NoDegrees",
        AmbientTooLarge { .. } => "AmbientTooLarge",
        DivByZero => "DivByZero",
        NotASubfield(_) => "NotASubfield",
        NotAdditive(_) => "NotAdditive",
    }
}

fn geometry_kind(e: &geometry::GeometryError) -> &'static str {
    use geometry::GeometryError::*;
    match e {
        ZeroVector => "ZeroVector",
        DimensionMismatch { .. } => "DimensionMismatch",
        UnknownSpecial(_) => "UnknownSpecial",
        BadPlace(_) => "BadPlace",
        Gf(g) => gf_kind(g),
    }
}

fn auto_kind(e: &autos::AutoError) -> &'static str {
    use autos::AutoError::*;
    match e {
        MissingSpecialAction { .. } => "MissingSpecialAction",
        GroupTooLarge(_) => "GroupTooLarge",
        UnfaithfulTestSet => "UnfaithfulTestSet",
        NotNormal => "NotNormal",
        NotInvertible(_) => "NotInvertible",
        ProbeMismatch => "ProbeMismatch",
        Geometry(g) => geometry_kind(g),
        Gf(g) => gf_kind(g),
    }
}

impl Error {
    /// Name of the innermost cause, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        use catalog::CatalogError as C;
        use criterion::CriterionError as R;
        match self {
            Error::Gf(e) | Error::Catalog(C::Gf(e)) => gf_kind(e),
            Error::Expr(_) | Error::Catalog(C::Expr(_)) => "ExpressionError",
            Error::Geometry(e) | Error::Catalog(C::Geometry(e)) => geometry_kind(e),
            Error::Auto(e) | Error::Catalog(C::Auto(e)) | Error::Criterion(R::Auto(e)) => {
                auto_kind(e)
            }
            Error::Criterion(R::InvalidInput(_)) => "InvalidInput",
            Error::Criterion(R::NotNormal(_)) => "NotNormal",
            Error::Catalog(C::ParamViolation(_)) => "ParamViolation",
            Error::Catalog(C::MissingGenerators(_)) => "MissingGenerators",
            Error::Catalog(C::ConstantUnavailable(_)) => "ConstantUnavailable",
            Error::Catalog(C::Invalid(_)) => "InvalidScenario",
        }
    }
}
