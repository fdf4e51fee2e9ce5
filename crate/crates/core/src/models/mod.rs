//! Built-in models.

pub mod curtu;
pub mod morris_lecar;

pub use curtu::{build_curtu, Curtu, CurtuParams};
pub use morris_lecar::{build_morris_lecar, ml_analytic_jet, MorrisLecar, MorrisLecarParams};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::model::{FJet3, GJet2, SlowFastModel, StateBox};

/// Runtime choice among the built-in models.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinModel {
    Curtu(Curtu),
    MorrisLecar(MorrisLecar),
}

impl BuiltinModel {
    /// Default-parameter model by name (`curtu` or `morris_lecar`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "curtu" => Ok(BuiltinModel::Curtu(Curtu::default())),
            "morris_lecar" => Ok(BuiltinModel::MorrisLecar(MorrisLecar::default())),
            other => Err(Error::InvalidParameter(format!(
                "unknown model '{other}' (built-in models: curtu, morris_lecar)"
            ))),
        }
    }
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            BuiltinModel::Curtu($m) => $e,
            BuiltinModel::MorrisLecar($m) => $e,
        }
    };
}

impl SlowFastModel for BuiltinModel {
    fn name(&self) -> &str {
        delegate!(self, m => m.name())
    }
    fn epsilon(&self) -> f64 {
        delegate!(self, m => m.epsilon())
    }
    fn fast<T: Real>(&self, xi: T, xj: T, yi: T) -> T {
        delegate!(self, m => m.fast(xi, xj, yi))
    }
    fn slow<T: Real>(&self, x: T, y: T) -> T {
        delegate!(self, m => m.slow(x, y))
    }
    fn domain(&self) -> StateBox {
        delegate!(self, m => m.domain())
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        delegate!(self, m => m.params())
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        Ok(match self {
            BuiltinModel::Curtu(m) => BuiltinModel::Curtu(m.with_param(name, value)?),
            BuiltinModel::MorrisLecar(m) => BuiltinModel::MorrisLecar(m.with_param(name, value)?),
        })
    }
    fn y_hint(&self, xi: f64, xj: f64) -> f64 {
        delegate!(self, m => m.y_hint(xi, xj))
    }
    fn fd_scale(&self) -> (f64, f64) {
        delegate!(self, m => m.fd_scale())
    }
    fn default_fold_bracket(&self) -> (f64, f64) {
        delegate!(self, m => m.default_fold_bracket())
    }
    fn channel_names(&self) -> [&'static str; 4] {
        delegate!(self, m => m.channel_names())
    }
    fn analytic_f_jet(&self, xi: f64, xj: f64, y: f64) -> Option<FJet3> {
        delegate!(self, m => m.analytic_f_jet(xi, xj, y))
    }
    fn analytic_g_jet(&self, x: f64, y: f64) -> Option<GJet2> {
        delegate!(self, m => m.analytic_g_jet(x, y))
    }
}
