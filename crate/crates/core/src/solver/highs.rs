use std::num::NonZeroU32;
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};

use super::{round_integral, Backend, Cmp, Model, Sense, SolveResult, SolverError, Status, VarKind};

/// The HiGHS MILP solver, linked statically.
#[derive(Debug, Clone, Copy, Default)]
pub struct Highs;

impl Backend for Highs {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &Model) -> Result<SolveResult, SolverError> {
        model.validate()?;
        let start = Instant::now();
        let mut pb = RowProblem::default();
        let flip = if model.sense() == Sense::Maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; model.num_vars()];
        for &(v, c) in &model.objective().terms {
            cost[v.0] += c * flip;
        }
        let cols: Vec<_> = model
            .vars()
            .iter()
            .zip(&cost)
            .map(|(info, &c)| pb.add_column_with_integrality(c, info.lb..=info.ub, info.kind != VarKind::Continuous))
            .collect();
        for c in model.constraints() {
            let row: Vec<_> = c.expr.terms.iter().map(|&(v, k)| (cols[v.0], k)).collect();
            match c.cmp {
                Cmp::Le => pb.add_row(..=c.rhs, &row),
                Cmp::Ge => pb.add_row(c.rhs.., &row),
                Cmp::Eq => pb.add_row(c.rhs..=c.rhs, &row),
            }
        }
        let mut hm = pb.optimise(highs::Sense::Minimise);
        hm.make_quiet();
        hm.set_option("time_limit", model.params.time_limit);
        if let Some(gap) = model.params.relative_gap {
            hm.set_option("mip_rel_gap", gap);
        }
        if let Some(t) = model.params.threads.and_then(NonZeroU32::new) {
            hm.set_threads(t);
        }
        let solved = hm.try_solve().map_err(|e| SolverError::BackendUnavailable(format!("HiGHS run failed: {e:?}")))?;
        let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => Status::Optimal,
            HighsModelStatus::ModelEmpty => Status::Optimal,
            HighsModelStatus::Infeasible => Status::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => Status::Unbounded,
            HighsModelStatus::ReachedTimeLimit if has_point => Status::Feasible,
            HighsModelStatus::ReachedTimeLimit => Status::TimedOut,
            other => return Err(SolverError::BackendUnavailable(format!("HiGHS ended with status {other:?}"))),
        };
        let (values, objective) = if matches!(status, Status::Optimal | Status::Feasible) {
            let mut values = if model.num_vars() == 0 { Vec::new() } else { solved.get_solution().columns().to_vec() };
            round_integral(model, &mut values)?;
            let obj = model.objective().eval(&values);
            (Some(values), Some(obj))
        } else {
            (None, None)
        };
        Ok(SolveResult { status, values, objective, wall_seconds: start.elapsed().as_secs_f64() })
    }
}
