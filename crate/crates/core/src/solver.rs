//! Backend-neutral mixed-integer linear models.
//!
//! Models are built once with [`Model`] and handed to a [`Backend`]. Two
//! backends ship: HiGHS (feature `highs`, the default) and an exhaustive
//! reference search for tiny pure-integer models. `FLOWWALKS_SOLVER`
//! (`highs` or `exhaustive`) picks the one returned by [`default_backend`].

use std::fmt::Write as _;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

pub mod exhaustive;
#[cfg(feature = "highs")]
pub mod highs;

/// Values within this distance of an integer are rounded to it.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_TIME_LIMIT: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

/// Sparse affine expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn term(v: Var, coef: f64) -> Self {
        LinExpr { terms: vec![(v, coef)], constant: 0.0 }
    }

    pub fn add_term(&mut self, v: Var, coef: f64) {
        self.terms.push((v, coef));
    }

    pub fn sum<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        LinExpr { terms: vars.into_iter().map(|v| (v, 1.0)).collect(), constant: 0.0 }
    }

    /// Merges duplicate variables and drops zero coefficients, keeping first-seen order.
    pub fn normalized(&self) -> LinExpr {
        let mut out: Vec<(Var, f64)> = Vec::with_capacity(self.terms.len());
        let mut slot: std::collections::HashMap<Var, usize> = std::collections::HashMap::new();
        for &(v, c) in &self.terms {
            match slot.get(&v) {
                Some(&i) => out[i].1 += c,
                None => {
                    slot.insert(v, out.len());
                    out.push((v, c));
                }
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        LinExpr { terms: out, constant: self.constant }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl<T: Into<LinExpr>> Add<T> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: T) -> LinExpr {
        self += rhs;
        self
    }
}

impl<T: Into<LinExpr>> AddAssign<T> for LinExpr {
    fn add_assign(&mut self, rhs: T) {
        let rhs = rhs.into();
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
    }
}

impl<T: Into<LinExpr>> Sub<T> for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: T) -> LinExpr {
        self + (-rhs.into())
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }
}

impl Mul<f64> for Var {
    type Output = LinExpr;
    fn mul(self, k: f64) -> LinExpr {
        LinExpr::term(self, k)
    }
}

impl<T: Into<LinExpr>> Add<T> for Var {
    type Output = LinExpr;
    fn add(self, rhs: T) -> LinExpr {
        LinExpr::from(self) + rhs
    }
}

impl<T: Into<LinExpr>> Sub<T> for Var {
    type Output = LinExpr;
    fn sub(self, rhs: T) -> LinExpr {
        LinExpr::from(self) - rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

/// `expr cmp rhs`, with the expression's constant already moved into `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub time_limit: f64,
    pub relative_gap: Option<f64>,
    pub threads: Option<u32>,
}

impl Default for Params {
    fn default() -> Self {
        Params { time_limit: DEFAULT_TIME_LIMIT, relative_gap: None, threads: None }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    vars: Vec<VarInfo>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
    sense: Sense,
    pub params: Params,
}

impl Default for Model {
    fn default() -> Self {
        Model {
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::new(),
            sense: Sense::Minimize,
            params: Params::default(),
        }
    }
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: f64, ub: f64) -> Var {
        let (lb, ub) = if kind == VarKind::Binary { (lb.max(0.0), ub.min(1.0)) } else { (lb, ub) };
        self.vars.push(VarInfo { name: name.into(), kind, lb, ub });
        Var(self.vars.len() - 1)
    }

    pub fn integer(&mut self, name: impl Into<String>, lb: i64, ub: i64) -> Var {
        self.add_var(name, VarKind::Integer, lb as f64, ub as f64)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> Var {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Var {
        self.add_var(name, VarKind::Continuous, lb, ub)
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, expr: impl Into<LinExpr>, cmp: Cmp, rhs: f64) {
        let expr = expr.into().normalized();
        let rhs = rhs - expr.constant;
        let expr = LinExpr { terms: expr.terms, constant: 0.0 };
        self.constraints.push(Constraint { name: name.into(), expr, cmp, rhs });
    }

    pub fn le(&mut self, name: impl Into<String>, expr: impl Into<LinExpr>, rhs: f64) {
        self.add_constraint(name, expr, Cmp::Le, rhs);
    }

    pub fn ge(&mut self, name: impl Into<String>, expr: impl Into<LinExpr>, rhs: f64) {
        self.add_constraint(name, expr, Cmp::Ge, rhs);
    }

    pub fn eq(&mut self, name: impl Into<String>, expr: impl Into<LinExpr>, rhs: f64) {
        self.add_constraint(name, expr, Cmp::Eq, rhs);
    }

    pub fn set_objective(&mut self, sense: Sense, expr: impl Into<LinExpr>) {
        self.sense = sense;
        self.objective = expr.into().normalized();
    }

    pub fn var(&self, v: Var) -> &VarInfo {
        &self.vars[v.0]
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn bounds(&self, v: Var) -> (f64, f64) {
        (self.vars[v.0].lb, self.vars[v.0].ub)
    }

    pub fn set_bounds(&mut self, v: Var, lb: f64, ub: f64) {
        self.vars[v.0].lb = lb;
        self.vars[v.0].ub = ub;
    }

    /// True iff both bounds of `v` equal `value`.
    pub fn is_fixed_to(&self, v: Var, value: f64) -> bool {
        self.vars[v.0].lb == value && self.vars[v.0].ub == value
    }

    /// Checks variable references and integer bounds.
    pub fn validate(&self) -> Result<(), SolverError> {
        for info in &self.vars {
            if info.kind != VarKind::Continuous && !(info.lb.is_finite() && info.ub.is_finite()) {
                return Err(SolverError::MalformedModel(format!(
                    "integer variable {} has an infinite bound",
                    info.name
                )));
            }
        }
        let n = self.vars.len();
        let bad = self
            .constraints
            .iter()
            .flat_map(|c| c.expr.terms.iter())
            .chain(self.objective.terms.iter())
            .find(|(v, _)| v.0 >= n);
        match bad {
            Some((v, _)) => Err(SolverError::MalformedModel(format!("undeclared variable index {}", v.0))),
            None => Ok(()),
        }
    }

    /// Max violation of any bound or constraint by `values`; 0 when feasible.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (info, &x) in self.vars.iter().zip(values) {
            worst = worst.max(info.lb - x).max(x - info.ub);
            if info.kind != VarKind::Continuous {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.constraints {
            let lhs = c.expr.eval(values);
            let gap = match c.cmp {
                Cmp::Le => lhs - c.rhs,
                Cmp::Ge => c.rhs - lhs,
                Cmp::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Present iff status is Optimal or Feasible; integer variables rounded.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub wall_seconds: f64,
}

impl SolveResult {
    pub fn value(&self, v: Var) -> f64 {
        self.values.as_ref().expect("no solution values")[v.0]
    }

    pub fn int_value(&self, v: Var) -> i64 {
        self.value(v).round() as i64
    }

    pub fn has_solution(&self) -> bool {
        self.values.is_some()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("solver backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("variable {name} = {value} is not within tolerance of an integer")]
    NonIntegral { name: String, value: f64 },
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &Model) -> Result<SolveResult, SolverError>;
}

/// Rounds integer variables, rejecting drift beyond [`INTEGRALITY_TOLERANCE`].
pub fn round_integral(model: &Model, values: &mut [f64]) -> Result<(), SolverError> {
    for (info, x) in model.vars().iter().zip(values.iter_mut()) {
        if info.kind == VarKind::Continuous {
            continue;
        }
        let r = x.round();
        if (*x - r).abs() > INTEGRALITY_TOLERANCE {
            return Err(SolverError::NonIntegral { name: info.name.clone(), value: *x });
        }
        *x = r;
    }
    Ok(())
}

/// Backend named by `FLOWWALKS_SOLVER`, defaulting to HiGHS when compiled in.
pub fn default_backend() -> Result<Box<dyn Backend>, SolverError> {
    let choice = std::env::var("FLOWWALKS_SOLVER").unwrap_or_default();
    backend_by_name(if choice.is_empty() { "highs" } else { &choice })
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn Backend>, SolverError> {
    match name.to_ascii_lowercase().as_str() {
        "exhaustive" => Ok(Box::new(exhaustive::Exhaustive::default())),
        #[cfg(feature = "highs")]
        "highs" => Ok(Box::new(highs::Highs)),
        #[cfg(not(feature = "highs"))]
        "highs" => Err(SolverError::BackendUnavailable("built without the `highs` feature".into())),
        other => Err(SolverError::BackendUnavailable(format!("unknown backend `{other}`"))),
    }
}

/// Solves with [`default_backend`].
pub fn solve(model: &Model) -> Result<SolveResult, SolverError> {
    default_backend()?.solve(model)
}

/// CPLEX LP text with variables and rows in declaration order.
pub fn export_lp_text(model: &Model) -> String {
    let mut out = String::new();
    out.push_str(match model.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let _ = writeln!(out, " obj: {}", lp_expr(model, model.objective()));
    out.push_str("Subject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let op = match c.cmp {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        };
        let name = if c.name.is_empty() { format!("c{i}") } else { lp_name(&c.name) };
        let _ = writeln!(out, " {name}: {} {op} {}", lp_expr(model, &c.expr), lp_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for info in model.vars() {
        let name = lp_name(&info.name);
        if info.lb == info.ub {
            let _ = writeln!(out, " {name} = {}", lp_num(info.lb));
        } else {
            let lb = if info.lb.is_finite() { lp_num(info.lb) } else { "-inf".into() };
            let ub = if info.ub.is_finite() { lp_num(info.ub) } else { "+inf".into() };
            let _ = writeln!(out, " {lb} <= {name} <= {ub}");
        }
    }
    let of_kind =
        |k: VarKind| -> Vec<String> { model.vars().iter().filter(|v| v.kind == k).map(|v| lp_name(&v.name)).collect() };
    for (header, kind) in [("General", VarKind::Integer), ("Binary", VarKind::Binary)] {
        let names = of_kind(kind);
        if !names.is_empty() {
            let _ = writeln!(out, "{header}\n {}", names.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn lp_expr(model: &Model, e: &LinExpr) -> String {
    let mut s = String::new();
    for (i, &(v, c)) in e.terms.iter().enumerate() {
        let sign = if c < 0.0 {
            "-"
        } else if i > 0 {
            "+"
        } else {
            ""
        };
        let mag = c.abs();
        let coef = if mag == 1.0 { String::new() } else { format!("{} ", lp_num(mag)) };
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{sign}{}{coef}{}", if sign.is_empty() { "" } else { " " }, lp_name(&model.var(v).name));
    }
    if e.terms.is_empty() {
        s.push_str(&lp_num(e.constant));
    }
    s
}

fn lp_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// LP names may not contain spaces or operator characters.
fn lp_name(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            // Brackets mark quadratic terms in LP files.
            '[' => '(',
            ']' => ')',
            c if c.is_ascii_alphanumeric() || "_.{}!\"#$%&();?@'`|~".contains(c) => c,
            _ => '_',
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backends() -> Vec<Box<dyn Backend>> {
        let mut b: Vec<Box<dyn Backend>> = vec![Box::new(exhaustive::Exhaustive::default())];
        #[cfg(feature = "highs")]
        b.push(Box::new(highs::Highs));
        b
    }

    #[test]
    fn box_optimum() {
        for b in backends() {
            let mut m = Model::new();
            let x = m.integer("x", 0, 3);
            m.set_objective(Sense::Maximize, x);
            let r = b.solve(&m).unwrap();
            assert_eq!(r.status, Status::Optimal, "{}", b.name());
            assert_eq!(r.int_value(x), 3);
            assert_eq!(r.objective, Some(3.0));
        }
    }

    #[test]
    fn binary_pair() {
        for b in backends() {
            let mut m = Model::new();
            let x = m.binary("x");
            let y = m.binary("y");
            m.eq("pair", x + y, 1.0);
            m.set_objective(Sense::Minimize, x);
            let r = b.solve(&m).unwrap();
            assert_eq!((r.int_value(x), r.int_value(y)), (0, 1), "{}", b.name());
        }
    }

    #[test]
    fn infeasible_pair() {
        for b in backends() {
            let mut m = Model::new();
            let x = m.integer("x", 0, 5);
            m.le("upper", x, 0.0);
            m.ge("lower", x, 1.0);
            assert_eq!(b.solve(&m).unwrap().status, Status::Infeasible, "{}", b.name());
        }
    }

    #[test]
    fn lp_golden_and_deterministic() {
        let mut m = Model::new();
        let x = m.integer("x", 0, 3);
        m.set_objective(Sense::Maximize, x);
        let text = export_lp_text(&m);
        assert_eq!(text, "Maximize\n obj: x\nSubject To\nBounds\n 0 <= x <= 3\nGeneral\n x\nEnd\n");
        let mut m2 = m.clone();
        m2.set_bounds(x, 0.0, 3.0);
        assert_eq!(export_lp_text(&m2), text);
    }

    #[test]
    fn lp_rows_and_signs() {
        let mut m = Model::new();
        let x = m.integer("x", 0, 3);
        let y = m.binary("y flag");
        m.le("r", x * 2.0 - y + 1.0, 4.0);
        m.set_objective(Sense::Minimize, x - y);
        let text = export_lp_text(&m);
        assert!(text.contains(" obj: x - y_flag\n"), "{text}");
        assert!(text.contains(" r: 2 x - y_flag <= 3\n"), "{text}");
        assert!(text.contains("Binary\n y_flag\n"), "{text}");
    }

    #[test]
    fn malformed_and_unknown_backend() {
        let mut m = Model::new();
        m.add_var("z", VarKind::Integer, 0.0, f64::INFINITY);
        assert!(matches!(m.validate(), Err(SolverError::MalformedModel(_))));
        assert!(matches!(backend_by_name("gurobi"), Err(SolverError::BackendUnavailable(_))));
    }
}
