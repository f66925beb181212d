//! Run configuration file (JSON, unknown keys rejected).

use std::f64::consts::PI;
use std::path::PathBuf;

use gaussflow_core::flow::FlowConfig;
use gaussflow_core::generate::{self, BandLimited};
use gaussflow_core::grassmann::ReferencePlane;
use gaussflow_core::monitors::{HuiskenSpec, IdentityProbe, MonitorSelection};
use gaussflow_core::surface::Representation;
use gaussflow_core::{
    BallParams, Error, FlowState, Grid, ParametricState, Result, Signature, SignatureKind, Slack, StencilOrder, Stepper,
};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub signature: SignatureSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub initial: InitialSpec,
    pub flow: FlowSpec,
    #[serde(default)]
    pub ball: Option<BallSpec>,
    #[serde(default)]
    pub monitors: MonitorsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureSpec {
    pub kind: SignatureKind,
    pub m: usize,
    pub n: usize,
}

/// Defaults: `2π` periods, cell centred at the origin.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub periods: Option<Vec<f64>>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Flat {
        #[serde(default)]
        tilt: Option<Vec<Vec<f64>>>,
    },
    Sine {
        amplitude: f64,
    },
    BandLimitedRandom {
        #[serde(default)]
        amplitude: Option<f64>,
        #[serde(default)]
        target_gauss_radius: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        zero_mean: bool,
    },
    /// Parametric circle; needs `m = 1` and a one-axis grid size.
    Circle {
        radius: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    #[serde(default = "default_representation")]
    pub representation: Representation,
    #[serde(default = "default_stepper")]
    pub stepper: Stepper,
    #[serde(default = "default_cfl")]
    pub cfl_factor: f64,
    pub t_end: f64,
    #[serde(default = "default_every")]
    pub monitor_every: usize,
    #[serde(default)]
    pub rescaled: bool,
    #[serde(default)]
    pub stencil_order: Option<u32>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn default_representation() -> Representation {
    Representation::Graph
}
fn default_stepper() -> Stepper {
    Stepper::Euler
}
fn default_cfl() -> f64 {
    0.5
}
fn default_every() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub radius: f64,
    #[serde(default)]
    pub center: CenterSpec,
}

/// Reference plane: the coordinate plane or the span of `m` ambient rows.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterSpec {
    #[default]
    Default,
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorsSpec {
    #[serde(default = "default_enabled")]
    pub enabled: Vec<MonitorName>,
    #[serde(default)]
    pub slack: Slack,
    #[serde(default)]
    pub huisken: Option<HuiskenSpec>,
    #[serde(default)]
    pub identity_probe: Option<IdentityProbe>,
}

impl Default for MonitorsSpec {
    fn default() -> Self {
        Self { enabled: default_enabled(), slack: Slack::default(), huisken: None, identity_probe: None }
    }
}

fn default_enabled() -> Vec<MonitorName> {
    vec![MonitorName::Weighted]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorName {
    Weighted,
    HuiskenDensity,
    IdentityResiduals,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { directory: default_dir(), formats: default_formats() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("gaussflow-out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Monitors, OutputFormat::Summary, OutputFormat::State]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// `monitors.csv`
    Monitors,
    /// `summary.json`
    Summary,
    /// `final_state.csv`
    State,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn signature(&self) -> Result<Signature> {
        Signature::new(self.signature.m, self.signature.n, self.signature.kind)
    }

    pub fn grid(&self, sig: &Signature) -> Result<Grid> {
        let spec = self.grid.as_ref().ok_or_else(|| bad("config: grid is required for this generator"))?;
        if spec.sizes.len() != sig.m {
            return Err(bad(format!("config: grid has {} axes, signature m = {}", spec.sizes.len(), sig.m)));
        }
        let periods = spec.periods.clone().unwrap_or_else(|| vec![2.0 * PI; sig.m]);
        let origin = spec.origin.clone().unwrap_or_else(|| periods.iter().map(|p| -p / 2.0).collect());
        Grid::with_origin(spec.sizes.clone(), periods, origin)
    }

    pub fn stencil_order(&self) -> Result<StencilOrder> {
        StencilOrder::from_order(self.flow.stencil_order.unwrap_or(2))
    }

    /// Builds the initial state in the configured representation.
    pub fn initial_state(&self) -> Result<FlowState> {
        let sig = self.signature()?;
        if let InitialSpec::Circle { radius } = self.initial {
            let size = self.grid.as_ref().and_then(|g| g.sizes.first().copied()).unwrap_or(256);
            if self.flow.representation != Representation::Parametric {
                return Err(bad("config: the circle generator needs the parametric representation"));
            }
            return Ok(FlowState::Parametric(generate::circle(sig, size, radius)?));
        }
        let grid = self.grid(&sig)?;
        let graph = match &self.initial {
            InitialSpec::Flat { tilt } => generate::flat(sig, grid, tilt.clone())?,
            InitialSpec::Sine { amplitude } => generate::sine(sig, grid, *amplitude)?,
            InitialSpec::BandLimitedRandom { amplitude, target_gauss_radius, seed } => {
                let mut f = BandLimited::random(sig, *seed);
                match (amplitude, target_gauss_radius) {
                    (Some(a), None) => f.amplitude = *a,
                    (None, Some(r)) => f.scale_to_radius(&grid, self.stencil_order()?, *r)?,
                    _ => return Err(bad("config: give exactly one of amplitude and target_gauss_radius")),
                }
                f.evaluate(&grid)?
            }
            InitialSpec::GaussianBump { amplitude, width, center, zero_mean } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; sig.m]);
                generate::gaussian_bump(sig, grid, *amplitude, *width, &c, *zero_mean)?
            }
            InitialSpec::Circle { .. } => unreachable!(),
        };
        Ok(match self.flow.representation {
            Representation::Graph => FlowState::Graph(graph),
            Representation::Parametric => FlowState::Parametric(ParametricState::from_graph(&graph)),
        })
    }

    pub fn flow_config(&self) -> Result<FlowConfig> {
        let sig = self.signature()?;
        let mut cfg = FlowConfig::new(self.flow.t_end);
        cfg.stepper = self.flow.stepper;
        cfg.cfl_factor = self.flow.cfl_factor;
        cfg.monitor_every = self.flow.monitor_every;
        cfg.rescaled = self.flow.rescaled;
        cfg.order = self.stencil_order()?;
        if let Some(max) = self.flow.max_steps {
            cfg.max_steps = max;
        }
        if let Some(ball) = &self.ball {
            let enabled = self.monitors.enabled.contains(&MonitorName::Weighted);
            // An explicit ball outside the feasible range is an error only
            // when the weighted monitor needs it.
            match BallParams::for_radius(ball.radius) {
                Ok(b) => cfg.ball = Some(b),
                Err(e) if enabled => return Err(e),
                Err(_) => {}
            }
            if let CenterSpec::Rows(rows) = &ball.center {
                cfg.reference = Some(ReferencePlane::from_rows(&sig, rows)?);
            }
        }
        let m = &self.monitors;
        let huisken = if m.enabled.contains(&MonitorName::HuiskenDensity) {
            Some(m.huisken.clone().ok_or_else(|| bad("config: huisken-density needs monitors.huisken"))?)
        } else {
            None
        };
        let identity_probe = if m.enabled.contains(&MonitorName::IdentityResiduals) {
            if self.flow.representation != Representation::Parametric {
                return Err(bad("config: identity residuals need the parametric representation"));
            }
            Some(m.identity_probe.unwrap_or_else(|| IdentityProbe::new(1e-3)))
        } else {
            None
        };
        cfg.monitors =
            MonitorSelection { weighted: m.enabled.contains(&MonitorName::Weighted), huisken, identity_probe };
        cfg.validate()?;
        Ok(cfg)
    }
}
