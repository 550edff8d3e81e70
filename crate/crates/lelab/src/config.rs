//! Strict JSON run configuration.

use std::path::{Path, PathBuf};

use lelab_core::diagnostics::DiagnosticsOptions;
use lelab_core::geometry::{Domain, DomainKind, MeshOptions, PeakRefinement, Point};
use lelab_core::solver::{NewtonOptions, SweepOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainKind,
    #[serde(default)]
    pub mesh: MeshSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    /// Echoed into reports. The pipeline itself is deterministic.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSpec {
    pub h: f64,
    pub peak_refinement: bool,
    pub refinement_radius: f64,
    /// Refinement center; located by a coarse pre-solve when absent.
    pub refinement_center: Option<Point>,
    pub min_radius: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        let r = PeakRefinement::at([0.0, 0.0]);
        Self {
            h: 0.025,
            peak_refinement: false,
            refinement_radius: r.radius,
            refinement_center: None,
            min_radius: r.min_radius,
        }
    }
}

/// Either an explicit list `p` or the inclusive range `start..=stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub continuation: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Self {
            newton_tol: n.tol,
            max_iter: n.max_iter,
            continuation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSpec {
    pub enabled: bool,
    pub concentration_threshold: f64,
    pub merge_factor: f64,
    pub bubble_radius: f64,
    pub green_exclusion_factor: f64,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        let d = DiagnosticsOptions::default();
        Self {
            enabled: true,
            concentration_threshold: d.concentration_threshold,
            merge_factor: d.merge_factor,
            bubble_radius: d.bubble_radius,
            green_exclusion_factor: d.green_exclusion_factor,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Nodal dump `x y u` of the solution.
    pub field: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    pub pohozaev_rel: f64,
    pub eigen_rel: f64,
    pub green_rel: f64,
    pub flux_rel: f64,
    pub energy_gap_rel: f64,
    /// Multiplies the converged field before checking; 1 leaves it alone.
    pub field_scale: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            pohozaev_rel: 0.05,
            eigen_rel: 0.05,
            green_rel: 0.05,
            flux_rel: 0.1,
            energy_gap_rel: 0.01,
            field_scale: 1.0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // serde_json errors carry "at line L column C".
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.mesh.h > 0.0) {
            return Err(invalid("mesh.h must be positive"));
        }
        if !(self.mesh.refinement_radius > 0.0) || !(self.mesh.min_radius > 0.0) {
            return Err(invalid("refinement radii must be positive"));
        }
        if !(self.solver.newton_tol > 0.0) {
            return Err(invalid("solver.newton_tol must be positive"));
        }
        let v = &self.verify;
        for (name, t) in [
            ("pohozaev_rel", v.pohozaev_rel),
            ("eigen_rel", v.eigen_rel),
            ("green_rel", v.green_rel),
            ("flux_rel", v.flux_rel),
            ("energy_gap_rel", v.energy_gap_rel),
        ] {
            if !(t >= 0.0) {
                return Err(invalid(format!("verify.{name} must be nonnegative")));
            }
        }
        if !(v.field_scale > 0.0) {
            return Err(invalid("verify.field_scale must be positive"));
        }
        let d = &self.diagnostics;
        if !(d.concentration_threshold > 0.0 && d.concentration_threshold <= 1.0) {
            return Err(invalid(
                "diagnostics.concentration_threshold must lie in (0, 1]",
            ));
        }
        if !(d.merge_factor > 0.0 && d.bubble_radius > 0.0 && d.green_exclusion_factor > 0.0) {
            return Err(invalid("diagnostics radii must be positive"));
        }
        for path in [&self.output.csv, &self.output.json, &self.output.field]
            .into_iter()
            .flatten()
        {
            if path.as_os_str().is_empty() {
                return Err(invalid("output paths must be nonempty"));
            }
        }
        self.p_values().map(|_| ())
    }

    /// Requested exponents in increasing order.
    pub fn p_values(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.sweep;
        let ps = match (&s.p, s.start, s.stop, s.step) {
            (Some(list), None, None, None) => list.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || !(stop >= start) {
                    return Err(invalid("sweep range needs step > 0 and stop ≥ start"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|k| start + k as f64 * step).collect()
            }
            _ => {
                return Err(invalid(
                    "sweep needs either `p` or all of `start`, `stop`, `step`",
                ))
            }
        };
        if ps.is_empty() {
            return Err(invalid("sweep has no exponents"));
        }
        if let Some(p) = ps.iter().find(|p| !(**p > 1.0) || !p.is_finite()) {
            return Err(invalid(format!("exponent must exceed 1 (got {p})")));
        }
        if ps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("exponents must be strictly increasing"));
        }
        Ok(ps)
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Domain::new(self.domain.clone()).map_err(|e| invalid(format!("domain: {e}")))
    }

    pub fn sweep_options(&self) -> SweepOptions {
        let mut o = SweepOptions::default();
        o.newton.tol = self.solver.newton_tol;
        o.newton.max_iter = self.solver.max_iter;
        o.continuation = self.solver.continuation;
        o
    }

    pub fn diagnostics_options(&self) -> DiagnosticsOptions {
        let d = &self.diagnostics;
        DiagnosticsOptions {
            concentration_threshold: d.concentration_threshold,
            merge_factor: d.merge_factor,
            bubble_radius: d.bubble_radius,
            green_exclusion_factor: d.green_exclusion_factor,
            ..DiagnosticsOptions::default()
        }
    }

    /// Mesh options with the refinement center filled in.
    pub fn mesh_options(&self, center: Option<Point>) -> MeshOptions {
        match (self.mesh.peak_refinement, center) {
            (true, Some(c)) => MeshOptions::refined(
                self.mesh.h,
                PeakRefinement {
                    center: c,
                    radius: self.mesh.refinement_radius,
                    min_radius: self.mesh.min_radius,
                },
            ),
            _ => MeshOptions::uniform(self.mesh.h),
        }
    }
}
