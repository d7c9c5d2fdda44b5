//! Scenario documents: a TOML file with named charts, forms, maps,
//! fibrations, families and sums, plus an ordered `run` list of tasks.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::bundle::{Collar, CutoffKind, FibrationSpec, Inherited, Overlap, Piece, DEFAULT_DELTA};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::fiber_sum::{SumSpec, DEFAULT_COLLAR_HALFWIDTH, DEFAULT_EPSILON};
use crate::form::DifferentialForm;
use crate::isotopy::{rotating_base_family, BaseFamily, ContactFamily, FamilySegment};
use crate::map::SmoothMap;
use crate::parse::parse_expr;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Bound {
    Num(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    #[serde(default)]
    coords: Vec<String>,
    #[serde(default)]
    bounds: Vec<[Bound; 2]>,
    #[serde(default)]
    periodic: Vec<String>,
    #[serde(default)]
    radial: Vec<String>,
    #[serde(default)]
    orientation: Option<i8>,
    /// Product of earlier charts, in order.
    #[serde(default)]
    product: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    chart: String,
    form: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    source: String,
    target: String,
    components: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    name: String,
    mu: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInherit {
    collar: String,
    normal: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollar {
    name: String,
    chart: String,
    normal: String,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    kind: Option<String>,
    joins: [String; 2],
    embed: String,
    #[serde(default)]
    potential: Option<String>,
    #[serde(default)]
    inherits: Vec<RawInherit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverlap {
    first: String,
    second: String,
    map: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFibration {
    fiber: String,
    beta: String,
    pieces: Vec<RawPiece>,
    #[serde(default)]
    collars: Vec<RawCollar>,
    #[serde(default)]
    overlaps: Vec<RawOverlap>,
    #[serde(default)]
    horizontal_boundary_trivial: bool,
    #[serde(default)]
    boundary_neighborhood: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    t0: f64,
    t1: f64,
    form: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotating {
    coord: String,
    amplitude: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(default)]
    chart: Option<String>,
    #[serde(default)]
    form: Option<String>,
    #[serde(default)]
    segments: Vec<RawSegment>,
    #[serde(default)]
    normalize: Option<String>,
    #[serde(default)]
    fibration: Option<String>,
    #[serde(default)]
    rotating: Option<RawRotating>,
    /// One family name per piece.
    #[serde(default)]
    base: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSum {
    left: String,
    right: String,
    left_piece: String,
    right_piece: String,
    n: usize,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    left_center: Option<Vec<f64>>,
    #[serde(default)]
    right_center: Option<Vec<f64>>,
    #[serde(default)]
    fiber_identification: Option<String>,
    #[serde(default)]
    fiber_potential: Option<String>,
    #[serde(default)]
    collar_halfwidth: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    task: String,
    #[serde(default)]
    target: Option<String>,
    #[serde(default)]
    expect: Option<String>,
    #[serde(default)]
    grid: Option<usize>,
    #[serde(default)]
    threshold: Option<f64>,
    #[serde(default)]
    t_samples: Option<usize>,
    #[serde(default)]
    slices: Option<usize>,
    #[serde(rename = "K", default)]
    k: Option<f64>,
    #[serde(default)]
    max_k: Option<f64>,
    /// `coord:min` / `coord:max` faces for the outward Liouville check.
    #[serde(default)]
    outward: Vec<String>,
    /// Form name for tasks that also need `β` (the potential task).
    #[serde(default)]
    form: Option<String>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    loops: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    charts: BTreeMap<String, RawChart>,
    #[serde(default)]
    forms: BTreeMap<String, RawForm>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    #[serde(default)]
    fibrations: BTreeMap<String, RawFibration>,
    #[serde(default)]
    families: BTreeMap<String, RawFamily>,
    #[serde(default)]
    sums: BTreeMap<String, RawSum>,
    #[serde(default)]
    run: Vec<RawTask>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    VerifyContact,
    VerifyExactSymplectic,
    Potential,
    Assemble,
    FindK,
    Family,
    FiberSum,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::VerifyContact,
        TaskKind::VerifyExactSymplectic,
        TaskKind::Potential,
        TaskKind::Assemble,
        TaskKind::FindK,
        TaskKind::Family,
        TaskKind::FiberSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::VerifyContact => "verify_contact",
            TaskKind::VerifyExactSymplectic => "verify_exact_symplectic",
            TaskKind::Potential => "potential",
            TaskKind::Assemble => "assemble",
            TaskKind::FindK => "find_K",
            TaskKind::Family => "family",
            TaskKind::FiberSum => "fiber_sum",
        }
    }

    pub fn from_name(s: &str) -> Option<TaskKind> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    /// Section of the document the task's target lives in.
    fn section(self) -> &'static str {
        match self {
            TaskKind::VerifyContact | TaskKind::VerifyExactSymplectic => "forms",
            TaskKind::Potential => "maps",
            TaskKind::Assemble | TaskKind::FindK => "fibrations",
            TaskKind::Family => "families",
            TaskKind::FiberSum => "sums",
        }
    }
}

/// A task with its parameter overrides.
#[derive(Clone, Debug)]
pub struct Task {
    pub kind: TaskKind,
    pub target: String,
    pub expect_fail: bool,
    pub grid: Option<usize>,
    pub threshold: Option<f64>,
    pub t_samples: Option<usize>,
    pub slices: Option<usize>,
    pub k: Option<f64>,
    pub max_k: Option<f64>,
    pub outward: Vec<(String, bool)>,
    pub form: Option<String>,
    pub tolerance: Option<f64>,
    pub loops: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum Family {
    /// A family of forms on one chart, parameter `t`.
    Chart(ContactFamily),
    /// Base families, one per piece of a fibration.
    Base { fibration: String, mus: BaseFamily },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub forms: BTreeMap<String, DifferentialForm>,
    pub maps: BTreeMap<String, SmoothMap>,
    pub fibrations: BTreeMap<String, FibrationSpec>,
    pub families: BTreeMap<String, Family>,
    pub sums: BTreeMap<String, SumSpec>,
    pub run: Vec<Task>,
    /// SHA-256 of the canonical re-serialization of the document.
    pub digest: String,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn toml_error(src: &str, e: toml::de::Error) -> Error {
    let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
    let message = e.message().trim().to_string();
    if let Some((_, rest)) = message.split_once("duplicate key `") {
        let mut parts = rest.split('`');
        let name = parts.next().unwrap_or_default().to_string();
        let section = parts.nth(1).unwrap_or_default().to_string();
        return Error::DuplicateName { section, name };
    }
    Error::Parse {
        line,
        column,
        message,
    }
}

/// SHA-256 of the document re-serialized from its parsed value, so that
/// formatting and comments do not change it.
pub fn canonical_digest(src: &str) -> Result<String> {
    let value: toml::Value = toml::from_str(src).map_err(|e| toml_error(src, e))?;
    let canonical = toml::to_string(&value).map_err(|e| Error::spec(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

fn in_section(section: &str, name: &str, e: Error) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("in [{section}.{name}]: {message}"),
        },
        Error::InvalidSpec(m) => Error::InvalidSpec(format!("[{section}.{name}]: {m}")),
        other => other,
    }
}

fn constant(e: &str) -> Result<f64> {
    parse_expr(e)?
        .eval_with(&|_| None)
        .map_err(|_| Error::spec(format!("`{e}` is not a constant")))
}

struct Loader {
    names: HashMap<String, &'static str>,
    scenario: Scenario,
}

impl Loader {
    fn declare(&mut self, section: &'static str, name: &str) -> Result<()> {
        if let Some(prev) = self.names.insert(name.to_string(), section) {
            return Err(Error::DuplicateName {
                section: if prev == section {
                    section.to_string()
                } else {
                    format!("{prev}/{section}")
                },
                name: name.to_string(),
            });
        }
        Ok(())
    }

    fn chart(&self, section: &str, name: &str) -> Result<Arc<Chart>> {
        self.scenario
            .charts
            .get(name)
            .cloned()
            .ok_or_else(|| Error::DanglingReference {
                section: section.to_string(),
                name: name.to_string(),
            })
    }

    fn form(&self, section: &str, name: &str) -> Result<DifferentialForm> {
        self.scenario
            .forms
            .get(name)
            .cloned()
            .ok_or_else(|| Error::DanglingReference {
                section: section.to_string(),
                name: name.to_string(),
            })
    }

    fn map(&self, section: &str, name: &str) -> Result<SmoothMap> {
        self.scenario
            .maps
            .get(name)
            .cloned()
            .ok_or_else(|| Error::DanglingReference {
                section: section.to_string(),
                name: name.to_string(),
            })
    }

    fn fibration(&self, section: &str, name: &str) -> Result<FibrationSpec> {
        self.scenario
            .fibrations
            .get(name)
            .cloned()
            .ok_or_else(|| Error::DanglingReference {
                section: section.to_string(),
                name: name.to_string(),
            })
    }

    fn load_chart(&self, name: &str, raw: &RawChart) -> Result<Chart> {
        if !raw.product.is_empty() {
            if !raw.coords.is_empty() || !raw.bounds.is_empty() {
                return Err(Error::spec("a product chart takes no coordinates of its own"));
            }
            let mut out = (*self.chart("charts", &raw.product[0])?).clone();
            for other in &raw.product[1..] {
                out = out.product(&*self.chart("charts", other)?)?;
            }
            out = out.renamed(name);
            if let Some(o) = raw.orientation {
                out = out.with_orientation(o)?;
            }
            return Ok(out);
        }
        if raw.coords.len() != raw.bounds.len() {
            return Err(Error::spec(format!(
                "{} coordinates but {} bounds",
                raw.coords.len(),
                raw.bounds.len()
            )));
        }
        let bounds = raw
            .bounds
            .iter()
            .map(|[a, b]| {
                let v = |x: &Bound| match x {
                    Bound::Num(v) => Ok(*v),
                    Bound::Expr(e) => constant(e),
                };
                Ok((v(a)?, v(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let coords: Vec<&str> = raw.coords.iter().map(|s| s.as_str()).collect();
        let mut c = Chart::new(name, &coords, &bounds)?;
        for p in &raw.periodic {
            c = c.with_periodic(p)?;
        }
        for r in &raw.radial {
            c = c.with_radial(r)?;
        }
        if let Some(o) = raw.orientation {
            c = c.with_orientation(o)?;
        }
        Ok(c)
    }

    fn load_fibration(&self, name: &str, raw: &RawFibration) -> Result<FibrationSpec> {
        let sec = "fibrations";
        let fiber = self.chart(sec, &raw.fiber)?;
        let beta = self.form(sec, &raw.beta)?;
        let mut piece_index = HashMap::new();
        let mut pieces = Vec::new();
        for (i, p) in raw.pieces.iter().enumerate() {
            if piece_index.insert(p.name.clone(), i).is_some() {
                return Err(Error::DuplicateName {
                    section: format!("{sec}.{name}.pieces"),
                    name: p.name.clone(),
                });
            }
            pieces.push(Piece {
                name: p.name.clone(),
                mu: self.form(sec, &p.mu)?,
            });
        }
        let piece = |n: &str| {
            piece_index.get(n).copied().ok_or_else(|| Error::DanglingReference {
                section: format!("{sec}.{name}.pieces"),
                name: n.to_string(),
            })
        };
        let mut collar_index: HashMap<String, usize> = HashMap::new();
        let mut collars = Vec::new();
        for (i, c) in raw.collars.iter().enumerate() {
            if collar_index.insert(c.name.clone(), i).is_some() {
                return Err(Error::DuplicateName {
                    section: format!("{sec}.{name}.collars"),
                    name: c.name.clone(),
                });
            }
            let embed = self.map(sec, &c.embed)?;
            let embed_piece = pieces
                .iter()
                .position(|p| **p.chart() == **embed.target())
                .ok_or_else(|| {
                    Error::spec(format!(
                        "collar `{}`: embedding target `{}` is not a piece chart",
                        c.name,
                        embed.target().name
                    ))
                })?;
            let kind = match c.kind.as_deref() {
                None | Some("two_sided") => CutoffKind::TwoSided,
                Some("one_sided") => CutoffKind::OneSided,
                Some(k) => return Err(Error::spec(format!("unknown collar kind `{k}`"))),
            };
            let inherits = c
                .inherits
                .iter()
                .map(|inh| {
                    let collar = collar_index.get(&inh.collar).copied().ok_or_else(|| {
                        Error::DanglingReference {
                            section: format!("{sec}.{name}.collars"),
                            name: inh.collar.clone(),
                        }
                    })?;
                    Ok(Inherited {
                        collar,
                        normal: parse_expr(&inh.normal)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            collars.push(Collar {
                name: c.name.clone(),
                chart: self.chart(sec, &c.chart)?,
                normal: c.normal.clone(),
                delta: c.delta.unwrap_or(DEFAULT_DELTA),
                kind,
                joins: (piece(&c.joins[0])?, piece(&c.joins[1])?),
                embed,
                embed_piece,
                potential: match &c.potential {
                    Some(p) => parse_expr(p)?,
                    None => ScalarExpr::zero(),
                },
                inherits,
            });
        }
        let collar = |n: &str| {
            collar_index.get(n).copied().ok_or_else(|| Error::DanglingReference {
                section: format!("{sec}.{name}.collars"),
                name: n.to_string(),
            })
        };
        let overlaps = raw
            .overlaps
            .iter()
            .map(|o| {
                Ok(Overlap {
                    first: collar(&o.first)?,
                    second: collar(&o.second)?,
                    map: self.map(sec, &o.map)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = FibrationSpec {
            name: name.to_string(),
            fiber,
            beta,
            pieces,
            collars,
            overlaps,
            horizontal_boundary_trivial: raw.horizontal_boundary_trivial,
            boundary_neighborhood: raw.boundary_neighborhood.as_deref().map(parse_expr).transpose()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn load_family(&self, name: &str, raw: &RawFamily) -> Result<Family> {
        let sec = "families";
        if let Some(fname) = &raw.fibration {
            let spec = self.fibration(sec, fname)?;
            let mus = if let Some(r) = &raw.rotating {
                rotating_base_family(&spec, &r.coord, r.amplitude)?
            } else {
                raw.base
                    .iter()
                    .map(|b| match self.scenario.families.get(b) {
                        Some(Family::Chart(f)) => Ok(f.clone()),
                        Some(Family::Base { .. }) => Err(Error::spec(format!(
                            "`{b}` is itself a base family"
                        ))),
                        None => Err(Error::DanglingReference {
                            section: sec.into(),
                            name: b.clone(),
                        }),
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            if mus.len() != spec.pieces.len() {
                return Err(Error::spec(format!(
                    "{} base families for {} pieces",
                    mus.len(),
                    spec.pieces.len()
                )));
            }
            return Ok(Family::Base {
                fibration: fname.clone(),
                mus,
            });
        }
        let chart_name = raw
            .chart
            .as_ref()
            .ok_or_else(|| Error::spec("a family needs `chart` or `fibration`"))?;
        let chart = self.chart(sec, chart_name)?;
        let family = match (&raw.form, raw.segments.is_empty()) {
            (Some(f), true) => ContactFamily::single(name, DifferentialForm::parse(&chart, f)?)?,
            (None, false) => ContactFamily::from_segments(
                name,
                raw.segments
                    .iter()
                    .map(|s| {
                        Ok(FamilySegment {
                            t0: s.t0,
                            t1: s.t1,
                            form: DifferentialForm::parse(&chart, &s.form)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?,
            _ => return Err(Error::spec("give either `form` or `segments`")),
        };
        let family = match &raw.normalize {
            Some(h) => {
                let grid = crate::grid::SampleGrid::default_for(&chart)?;
                crate::isotopy::normalize_family(&family, &parse_expr(h)?, &grid)?
            }
            None => family,
        };
        Ok(Family::Chart(family))
    }

    fn load_sum(&self, name: &str, raw: &RawSum) -> Result<SumSpec> {
        let sec = "sums";
        let left = self.fibration(sec, &raw.left)?;
        let right = self.fibration(sec, &raw.right)?;
        let find = |spec: &FibrationSpec, p: &str| {
            spec.pieces
                .iter()
                .position(|q| q.name == p)
                .ok_or_else(|| Error::DanglingReference {
                    section: format!("{sec}.{name}"),
                    name: p.to_string(),
                })
        };
        let dim = 2 * raw.n + 1;
        let sum = SumSpec {
            name: name.to_string(),
            left_piece: find(&left, &raw.left_piece)?,
            right_piece: find(&right, &raw.right_piece)?,
            left,
            right,
            n: raw.n,
            epsilon: raw.epsilon.unwrap_or(DEFAULT_EPSILON),
            left_center: raw.left_center.clone().unwrap_or(vec![0.0; dim]),
            right_center: raw.right_center.clone().unwrap_or(vec![0.0; dim]),
            fiber_identification: raw
                .fiber_identification
                .as_ref()
                .map(|m| self.map(sec, m))
                .transpose()?,
            fiber_potential: raw.fiber_potential.as_deref().map(parse_expr).transpose()?,
            collar_halfwidth: raw.collar_halfwidth.unwrap_or(DEFAULT_COLLAR_HALFWIDTH),
        };
        Ok(sum)
    }

    fn load_task(&self, i: usize, raw: &RawTask) -> Result<Task> {
        let section = format!("run.{i}");
        let kind = TaskKind::from_name(&raw.task)
            .ok_or_else(|| Error::spec(format!("[{section}]: unknown task `{}`", raw.task)))?;
        let target = raw
            .target
            .clone()
            .ok_or_else(|| Error::spec(format!("[{section}]: missing `target`")))?;
        let s = &self.scenario;
        let exists = match kind {
            TaskKind::VerifyContact | TaskKind::VerifyExactSymplectic => s.forms.contains_key(&target),
            TaskKind::Potential => s.maps.contains_key(&target),
            TaskKind::Assemble | TaskKind::FindK => s.fibrations.contains_key(&target),
            TaskKind::Family => s.families.contains_key(&target),
            TaskKind::FiberSum => s.sums.contains_key(&target),
        };
        if !exists {
            return Err(Error::DanglingReference {
                section: kind.section().to_string(),
                name: target,
            });
        }
        if let Some(f) = &raw.form {
            self.form(&section, f)?;
        }
        if kind == TaskKind::Potential && raw.form.is_none() {
            return Err(Error::spec(format!("[{section}]: the potential task needs `form` (β)")));
        }
        let expect_fail = match raw.expect.as_deref() {
            None | Some("pass") => false,
            Some("fail") => true,
            Some(e) => return Err(Error::spec(format!("[{section}]: expect must be pass or fail, got `{e}`"))),
        };
        let outward = raw
            .outward
            .iter()
            .map(|o| match o.rsplit_once(':') {
                Some((c, "max")) => Ok((c.to_string(), true)),
                Some((c, "min")) => Ok((c.to_string(), false)),
                _ => Err(Error::spec(format!(
                    "[{section}]: outward faces are written `coord:min` or `coord:max`, got `{o}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Task {
            kind,
            target,
            expect_fail,
            grid: raw.grid,
            threshold: raw.threshold,
            t_samples: raw.t_samples,
            slices: raw.slices,
            k: raw.k,
            max_k: raw.max_k,
            outward,
            form: raw.form.clone(),
            tolerance: raw.tolerance,
            loops: raw.loops,
        })
    }
}

/// Parses and resolves a scenario document.
pub fn parse_scenario(src: &str, default_name: &str) -> Result<Scenario> {
    let digest = canonical_digest(src)?;
    let raw: RawDocument = toml::from_str(src).map_err(|e| toml_error(src, e))?;
    let mut l = Loader {
        names: HashMap::new(),
        scenario: Scenario {
            name: raw.name.clone().unwrap_or_else(|| default_name.to_string()),
            description: raw.description.clone(),
            charts: BTreeMap::new(),
            forms: BTreeMap::new(),
            maps: BTreeMap::new(),
            fibrations: BTreeMap::new(),
            families: BTreeMap::new(),
            sums: BTreeMap::new(),
            run: Vec::new(),
            digest,
        },
    };
    // products may refer to any chart, so plain charts load first
    let (products, plain): (Vec<_>, Vec<_>) =
        raw.charts.iter().partition(|(_, c)| !c.product.is_empty());
    for (name, c) in plain.into_iter().chain(products) {
        l.declare("charts", name)?;
        let chart = l.load_chart(name, c).map_err(|e| in_section("charts", name, e))?;
        l.scenario.charts.insert(name.clone(), chart.shared());
    }
    for (name, f) in &raw.forms {
        l.declare("forms", name)?;
        let chart = l.chart("forms", &f.chart)?;
        let form = DifferentialForm::parse(&chart, &f.form).map_err(|e| in_section("forms", name, e))?;
        l.scenario.forms.insert(name.clone(), form);
    }
    for (name, m) in &raw.maps {
        l.declare("maps", name)?;
        let src = l.chart("maps", &m.source)?;
        let tgt = l.chart("maps", &m.target)?;
        let comps: Vec<&str> = m.components.iter().map(|s| s.as_str()).collect();
        let map = SmoothMap::parse(&src, &tgt, &comps).map_err(|e| in_section("maps", name, e))?;
        l.scenario.maps.insert(name.clone(), map);
    }
    for (name, f) in &raw.fibrations {
        l.declare("fibrations", name)?;
        let spec = l
            .load_fibration(name, f)
            .map_err(|e| in_section("fibrations", name, e))?;
        l.scenario.fibrations.insert(name.clone(), spec);
    }
    // chart families first: base families may list them
    let (base, chart): (Vec<_>, Vec<_>) =
        raw.families.iter().partition(|(_, f)| f.fibration.is_some());
    for (name, f) in chart.into_iter().chain(base) {
        l.declare("families", name)?;
        let fam = l.load_family(name, f).map_err(|e| in_section("families", name, e))?;
        l.scenario.families.insert(name.clone(), fam);
    }
    for (name, s) in &raw.sums {
        l.declare("sums", name)?;
        let sum = l.load_sum(name, s).map_err(|e| in_section("sums", name, e))?;
        l.scenario.sums.insert(name.clone(), sum);
    }
    for (i, t) in raw.run.iter().enumerate() {
        let task = l.load_task(i, t)?;
        l.scenario.run.push(task);
    }
    Ok(l.scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let src = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    parse_scenario(&src, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
name = "small"

[charts.C]
coords = ["x", "y", "z"]
bounds = [[-1, 1], [-1, 1], [-1, 1]]

[forms.alpha]
chart = "C"
form = "dz + x*dy"

[[run]]
task = "verify_contact"
target = "alpha"
"#;

    #[test]
    fn loads_small_document() {
        let s = parse_scenario(SMALL, "x").unwrap();
        assert_eq!(s.name, "small");
        assert_eq!(s.run.len(), 1);
        assert_eq!(s.run[0].kind, TaskKind::VerifyContact);
        assert_eq!(s.digest.len(), 64);
    }

    #[test]
    fn digest_ignores_whitespace_and_comments() {
        let spaced = SMALL.replace("= ", "=    ").replace("\n[", "\n# note\n\n[");
        assert_eq!(canonical_digest(SMALL).unwrap(), canonical_digest(&spaced).unwrap());
        let changed = SMALL.replace("x*dy", "2*x*dy");
        assert_ne!(canonical_digest(SMALL).unwrap(), canonical_digest(&changed).unwrap());
    }

    #[test]
    fn dangling_chart() {
        let bad = SMALL.replace("chart = \"C\"", "chart = \"D\"");
        match parse_scenario(&bad, "x") {
            Err(Error::DanglingReference { section, name }) => {
                assert_eq!(section, "forms");
                assert_eq!(name, "D");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_names() {
        let twice = format!("{SMALL}\n[charts.C]\ncoords = [\"u\"]\nbounds = [[0, 1]]\n");
        assert!(matches!(
            parse_scenario(&twice, "x"),
            Err(Error::DuplicateName { .. })
        ));
        let clash = format!("{SMALL}\n[maps.alpha]\nsource = \"C\"\ntarget = \"C\"\ncomponents = [\"x\", \"y\", \"z\"]\n");
        match parse_scenario(&clash, "x") {
            Err(Error::DuplicateName { name, .. }) => assert_eq!(name, "alpha"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let bad = SMALL.replace("bounds = [[-1, 1], [-1, 1], [-1, 1]]", "bounds = [[-1, 1], [-1, 1]");
        match parse_scenario(&bad, "x") {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("{other:?}"),
        }
        let bad = SMALL.replace("dz + x*dy", "dz + x*");
        assert!(matches!(parse_scenario(&bad, "x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_task_target() {
        let bad = SMALL.replace("target = \"alpha\"", "target = \"beta\"");
        assert!(matches!(
            parse_scenario(&bad, "x"),
            Err(Error::DanglingReference { .. })
        ));
    }

    #[test]
    fn constant_bounds() {
        let src = SMALL.replace("[[-1, 1], [-1, 1], [-1, 1]]", "[[0, \"2*pi\"], [-1, 1], [-1, 1]]");
        let s = parse_scenario(&src, "x").unwrap();
        assert!((s.charts["C"].bounds[0].1 - std::f64::consts::TAU).abs() < 1e-15);
    }
}
