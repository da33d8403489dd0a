//! Variable frequency statistics of an encoding: clause occurrence counts
//! `h(v)`, top-p variable sets, the transition index and branching
//! frequencies of solver decision logs.

use std::io::{self, Write};

use thiserror::Error;

use crate::cnf::{CnfInstance, Role};
use crate::plan::Decision;

/// Statistical role of a variable. Facts and auxiliary variables are `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatRole {
    Transition,
    Action,
    Other,
}

impl StatRole {
    pub fn of(role: Role) -> StatRole {
        match role {
            Role::Transition => StatRole::Transition,
            Role::Action => StatRole::Action,
            Role::Fact | Role::Auxiliary => StatRole::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StatRole::Transition => "transition",
            StatRole::Action => "action",
            StatRole::Other => "other",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("percentile must be in (0, 100], got {0}")]
    Percentile(f64),
    #[error("the instance has no transition variables")]
    NoTransitionVariables,
    #[error("the instance has no variables")]
    NoVariables,
    #[error("epoch length must be at least 1")]
    ZeroEpoch,
    #[error("decision log is empty")]
    EmptyLog,
    #[error("decision log names variable {0}, which the instance lacks")]
    UnknownVariable(u32),
}

/// `h(v)` for every variable (index `v - 1`) and the role of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HProfile {
    pub h: Vec<u64>,
    pub roles: Vec<StatRole>,
}

impl HProfile {
    pub fn num_vars(&self) -> usize {
        self.h.len()
    }

    pub fn count(&self, role: StatRole) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    pub fn role_of(&self, var: u32) -> Option<StatRole> {
        self.roles.get((var as usize).checked_sub(1)?).copied()
    }

    pub fn total(&self) -> u64 {
        self.h.iter().sum()
    }

    pub fn role_mass(&self, role: StatRole) -> u64 {
        self.h.iter().zip(&self.roles).filter(|(_, &r)| r == role).map(|(h, _)| h).sum()
    }
}

/// Counts, for every variable, the original clauses it occurs in.
pub fn h_values(cnf: &CnfInstance) -> HProfile {
    let n = cnf.var_count() as usize;
    let mut h = vec![0u64; n];
    for c in cnf.clauses() {
        for l in c {
            h[l.var() as usize - 1] += 1;
        }
    }
    let roles = (1..=n as u32)
        .map(|v| StatRole::of(cnf.key_of(v).expect("dense ids").role))
        .collect();
    HProfile { h, roles }
}

fn check_p(p: f64) -> Result<(), StatsError> {
    if p > 0.0 && p <= 100.0 {
        Ok(())
    } else {
        Err(StatsError::Percentile(p))
    }
}

/// `h^p`: the largest `h` such that at least `p%` of the variables have `h(v) >= h`.
pub fn percentile_threshold(profile: &HProfile, p: f64) -> Result<u64, StatsError> {
    check_p(p)?;
    if profile.h.is_empty() {
        return Err(StatsError::NoVariables);
    }
    let mut sorted = profile.h.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len() as f64;
    // smallest k with k * 100 >= p * n
    let k = sorted.iter().enumerate().find(|(i, _)| (*i as f64 + 1.0) * 100.0 >= p * n).map(|(i, _)| i).expect("p <= 100");
    Ok(sorted[k])
}

/// `V^p` as sorted variable ids.
pub fn percentile_set(profile: &HProfile, p: f64) -> Result<Vec<u32>, StatsError> {
    let threshold = percentile_threshold(profile, p)?;
    Ok(profile
        .h
        .iter()
        .enumerate()
        .filter(|(_, &h)| h >= threshold)
        .map(|(i, _)| i as u32 + 1)
        .collect())
}

/// `(|V_δ^p| / |V^p|) / (|V_δ| / |V|)`.
pub fn transition_index(profile: &HProfile, p: f64) -> Result<f64, StatsError> {
    let top = percentile_set(profile, p)?;
    let all_delta = profile.count(StatRole::Transition);
    if all_delta == 0 {
        return Err(StatsError::NoTransitionVariables);
    }
    let top_delta = top
        .iter()
        .filter(|&&v| profile.role_of(v) == Some(StatRole::Transition))
        .count();
    let num = (top_delta * profile.num_vars()) as f64;
    let den = (top.len() * all_delta) as f64;
    Ok(num / den)
}

/// One row of the role summary table. `None` marks an empty group.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleSummary {
    pub role: StatRole,
    pub count: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    /// Mean `h` of this role's variables inside `V^p`, per requested `p`.
    pub top_means: Vec<(f64, Option<f64>)>,
}

fn mean_sd(values: &[u64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<u64>() as f64 / n;
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Mean and population standard deviation of `h` per role, plus role means
/// restricted to each top set.
pub fn role_summaries(profile: &HProfile, percentiles: &[f64]) -> Result<Vec<RoleSummary>, StatsError> {
    let tops = percentiles
        .iter()
        .map(|&p| Ok((p, percentile_set(profile, p)?)))
        .collect::<Result<Vec<_>, StatsError>>()?;
    let mut out = Vec::new();
    for role in [StatRole::Transition, StatRole::Action, StatRole::Other] {
        let values: Vec<u64> = profile
            .h
            .iter()
            .zip(&profile.roles)
            .filter(|(_, &r)| r == role)
            .map(|(&h, _)| h)
            .collect();
        let (mean, sd) = mean_sd(&values);
        let top_means = tops
            .iter()
            .map(|(p, set)| {
                let vals: Vec<u64> = set
                    .iter()
                    .filter(|&&v| profile.role_of(v) == Some(role))
                    .map(|&v| profile.h[v as usize - 1])
                    .collect();
                (*p, mean_sd(&vals).0)
            })
            .collect();
        out.push(RoleSummary {
            role,
            count: values.len(),
            mean,
            sd,
            top_means,
        });
    }
    Ok(out)
}

/// Decision counts of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EpochCounts {
    pub len: usize,
    pub transition: usize,
    pub action: usize,
    pub other: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingFrequency {
    pub k: usize,
    pub num_transition_vars: usize,
    pub num_action_vars: usize,
    pub epochs: Vec<EpochCounts>,
    pub partial: Option<EpochCounts>,
}

impl BranchingFrequency {
    /// `M_δ / (len |V_δ|)` and `M_o / (len |V_o|)`; `None` when the role has no variables.
    pub fn frequencies(&self, e: &EpochCounts) -> (Option<f64>, Option<f64>) {
        let f = |m: usize, n: usize| (n > 0).then(|| m as f64 / (e.len as f64 * n as f64));
        (f(e.transition, self.num_transition_vars), f(e.action, self.num_action_vars))
    }
}

/// Splits a decision log into epochs of `k` decisions and counts roles.
pub fn branching_frequency(log: &[Decision], profile: &HProfile, k: usize) -> Result<BranchingFrequency, StatsError> {
    if k == 0 {
        return Err(StatsError::ZeroEpoch);
    }
    if log.is_empty() {
        return Err(StatsError::EmptyLog);
    }
    let mut epochs = Vec::new();
    let mut partial = None;
    for chunk in log.chunks(k) {
        let mut e = EpochCounts {
            len: chunk.len(),
            ..Default::default()
        };
        for d in chunk {
            match profile.role_of(d.var).ok_or(StatsError::UnknownVariable(d.var))? {
                StatRole::Transition => e.transition += 1,
                StatRole::Action => e.action += 1,
                StatRole::Other => e.other += 1,
            }
        }
        if chunk.len() == k {
            epochs.push(e);
        } else {
            partial = Some(e);
        }
    }
    Ok(BranchingFrequency {
        k,
        num_transition_vars: profile.count(StatRole::Transition),
        num_action_vars: profile.count(StatRole::Action),
        epochs,
        partial,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// `role,count,mean,sd,top<p>...` with `-` for empty groups.
pub fn write_summary_csv(rows: &[RoleSummary], sink: &mut impl Write) -> io::Result<()> {
    write!(sink, "role,count,mean,sd")?;
    if let Some(first) = rows.first() {
        for (p, _) in &first.top_means {
            write!(sink, ",top{p}")?;
        }
    }
    writeln!(sink)?;
    for r in rows {
        write!(sink, "{},{},{},{}", r.role.as_str(), r.count, cell(r.mean), cell(r.sd))?;
        for (_, m) in &r.top_means {
            write!(sink, ",{}", cell(*m))?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// `p,index` rows.
pub fn write_index_csv(series: &[(f64, f64)], sink: &mut impl Write) -> io::Result<()> {
    writeln!(sink, "p,index")?;
    for (p, idx) in series {
        writeln!(sink, "{p},{idx:.6}")?;
    }
    Ok(())
}

/// `epoch,freq_transition,freq_action,transition,action,other,complete` rows;
/// the trailing partial epoch, if any, is marked `complete=0`.
pub fn write_branching_csv(bf: &BranchingFrequency, sink: &mut impl Write) -> io::Result<()> {
    writeln!(sink, "epoch,freq_transition,freq_action,transition,action,other,complete")?;
    let rows = bf.epochs.iter().map(|e| (e, 1)).chain(bf.partial.iter().map(|e| (e, 0)));
    for (i, (e, complete)) in rows.enumerate() {
        let (fd, fo) = bf.frequencies(e);
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        writeln!(
            sink,
            "{},{},{},{},{},{},{}",
            i + 1,
            fmt(fd),
            fmt(fo),
            e.transition,
            e.action,
            e.other,
            complete
        )?;
    }
    Ok(())
}
