//! Random problem generation: one foundational object, then `n_clauses`
//! clauses that each introduce one or two points related to existing ones.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lang::{Clause, Constraint, PointId, Problem, RelationKind, MAX_POINTS};
use crate::seed::rng;

pub const MAX_CLAUSES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleGrid {
    /// {15, 20, ..., 75} degrees, the angle-detection class set.
    Benchmark,
    /// Any integer in [15, 165].
    Free,
}

impl AngleGrid {
    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            AngleGrid::Benchmark => f64::from(15 + 5 * rng.gen_range(0..13u32)),
            AngleGrid::Free => f64::from(rng.gen_range(15..=165u32)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub relation_pool: Vec<RelationKind>,
    pub object_pool: Vec<RelationKind>,
    pub n_clauses: usize,
    pub seed: u64,
    pub angle_grid: AngleGrid,
}

impl SamplerConfig {
    pub fn full(n_clauses: usize, seed: u64) -> Self {
        Self {
            relation_pool: RelationKind::RELATIONS.to_vec(),
            object_pool: RelationKind::OBJECTS.to_vec(),
            n_clauses,
            seed,
            angle_grid: AngleGrid::Free,
        }
    }
}

/// Length values in problem units: 0.5 to 2.0 in quarter steps.
pub fn sample_length<R: Rng>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(2..=8u32)) * 0.25
}

/// Incrementally builds a problem, tracking names and the point budget.
#[derive(Clone, Debug)]
pub struct ProblemBuilder {
    problem: Problem,
    points: Vec<PointId>,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self {
            problem: Problem { clauses: vec![] },
            points: vec![],
        }
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn finish(self) -> Problem {
        self.problem
    }

    /// Next unused name in a, b, ..., z, a1, b1, ...
    pub fn fresh_name(&self) -> PointId {
        for round in 0.. {
            for ch in b'a'..=b'z' {
                let name = if round == 0 {
                    (ch as char).to_string()
                } else {
                    format!("{}{}", ch as char, round)
                };
                let id = PointId::new(name).expect("generated names are valid");
                if !self.points.contains(&id) {
                    return id;
                }
            }
        }
        unreachable!()
    }

    pub fn push(&mut self, clause: Clause) {
        self.points.extend(clause.new_points.iter().cloned());
        self.problem.clauses.push(clause);
    }

    /// Adds an object constructor over freshly named points.
    pub fn add_object(&mut self, kind: RelationKind) -> Vec<PointId> {
        let mut names = Vec::with_capacity(kind.arity());
        for _ in 0..kind.arity() {
            let n = self.fresh_name();
            self.points.push(n.clone());
            names.push(n);
        }
        self.points.truncate(self.points.len() - names.len());
        self.push(Clause {
            new_points: names.clone(),
            constraints: vec![Constraint {
                kind,
                args: names.clone(),
                value: None,
            }],
        });
        names
    }

    /// One iteration of the sampling loop: fresh points, a relation from the
    /// pool, old points drawn from the existing ones.
    pub fn add_random_clause<R: Rng>(
        &mut self,
        pool: &[RelationKind],
        grid: AngleGrid,
        max_new: usize,
        rng: &mut R,
    ) -> bool {
        let room = MAX_POINTS
            .saturating_sub(self.points.len())
            .min(max_new)
            .min(2);
        if room == 0 || pool.is_empty() {
            return false;
        }
        for _ in 0..64 {
            let kind = *pool.choose(rng).expect("non-empty pool");
            let want_two = room >= 2 && rng.gen_bool(0.3);
            let clause = if want_two {
                self.template_two(kind, grid, rng)
                    .or_else(|| self.template_one(kind, grid, rng))
            } else {
                self.template_one(kind, grid, rng)
            };
            if let Some(c) = clause {
                self.push(c);
                return true;
            }
        }
        false
    }

    fn pick_distinct<R: Rng>(&self, k: usize, rng: &mut R) -> Option<Vec<PointId>> {
        if self.points.len() < k {
            return None;
        }
        Some(self.points.choose_multiple(rng, k).cloned().collect())
    }

    fn template_one<R: Rng>(
        &self,
        kind: RelationKind,
        grid: AngleGrid,
        rng: &mut R,
    ) -> Option<Clause> {
        use RelationKind::*;
        let x = self.fresh_name();
        let xs = x.as_str().to_string();
        let pick = |k: usize, rng: &mut R| self.pick_distinct(k, rng);
        let names = |v: &[PointId]| v.iter().map(|p| p.as_str().to_string()).collect::<Vec<_>>();
        let (args, value): (Vec<String>, Option<f64>) = match kind {
            Perpendicular => {
                let bc = names(&pick(2, rng)?);
                let a = self.points.choose(rng)?.as_str().to_string();
                (vec![xs, a, bc[0].clone(), bc[1].clone()], None)
            }
            Parallel => {
                let v = names(&pick(3, rng)?);
                (vec![xs, v[0].clone(), v[1].clone(), v[2].clone()], None)
            }
            Collinear => {
                let v = names(&pick(2, rng)?);
                (vec![xs, v[0].clone(), v[1].clone()], None)
            }
            Concyclic => {
                let v = names(&pick(3, rng)?);
                (vec![v[0].clone(), v[1].clone(), v[2].clone(), xs], None)
            }
            AngleMeasure => {
                let v = names(&pick(2, rng)?);
                (vec![v[0].clone(), v[1].clone(), xs], Some(grid.sample(rng)))
            }
            LengthMeasure => {
                let a = self.points.choose(rng)?.as_str().to_string();
                (vec![a, xs], Some(sample_length(rng)))
            }
            Midpoint => {
                let v = names(&pick(2, rng)?);
                (vec![xs, v[0].clone(), v[1].clone()], None)
            }
            Foot => {
                let v = names(&pick(3, rng)?);
                (vec![xs, v[0].clone(), v[1].clone(), v[2].clone()], None)
            }
            Circumcenter => {
                let v = names(&pick(3, rng)?);
                (vec![xs, v[0].clone(), v[1].clone(), v[2].clone()], None)
            }
            EqLength => {
                let a = self.points.choose(rng)?.as_str().to_string();
                let bc = names(&pick(2, rng)?);
                (vec![a, xs, bc[0].clone(), bc[1].clone()], None)
            }
            EqAngle => {
                let ab = names(&pick(2, rng)?);
                let cde = names(&pick(3, rng)?);
                let mut args = vec![ab[0].clone(), ab[1].clone(), xs];
                args.extend(cde);
                (args, None)
            }
            EqRatio => {
                let ab = names(&pick(2, rng)?);
                let cd = names(&pick(2, rng)?);
                let ef = names(&pick(2, rng)?);
                (
                    vec![
                        ab[0].clone(),
                        xs,
                        ab[0].clone(),
                        ab[1].clone(),
                        cd[0].clone(),
                        cd[1].clone(),
                        ef[0].clone(),
                        ef[1].clone(),
                    ],
                    None,
                )
            }
            _ => return None,
        };
        Some(single(vec![x], kind, args, value))
    }

    fn template_two<R: Rng>(
        &self,
        kind: RelationKind,
        grid: AngleGrid,
        rng: &mut R,
    ) -> Option<Clause> {
        use RelationKind::*;
        let x = self.fresh_name();
        let mut probe = self.clone();
        probe.points.push(x.clone());
        let y = probe.fresh_name();
        let (xs, ys) = (x.as_str().to_string(), y.as_str().to_string());
        let names = |v: Vec<PointId>| v.iter().map(|p| p.as_str().to_string()).collect::<Vec<_>>();
        let (args, value): (Vec<String>, Option<f64>) = match kind {
            Perpendicular | Parallel | EqLength => {
                let v = names(self.pick_distinct(2, rng)?);
                (vec![xs, ys, v[0].clone(), v[1].clone()], None)
            }
            Collinear => {
                let a = self.points.choose(rng)?.as_str().to_string();
                (vec![a, xs, ys], None)
            }
            Concyclic => {
                let v = names(self.pick_distinct(2, rng)?);
                (vec![v[0].clone(), v[1].clone(), xs, ys], None)
            }
            AngleMeasure => {
                let a = self.points.choose(rng)?.as_str().to_string();
                (vec![xs, a, ys], Some(grid.sample(rng)))
            }
            LengthMeasure => (vec![xs, ys], Some(sample_length(rng))),
            Midpoint => {
                let a = self.points.choose(rng)?.as_str().to_string();
                (vec![xs, a, ys], None)
            }
            Foot => {
                let v = names(self.pick_distinct(2, rng)?);
                (vec![xs, ys, v[0].clone(), v[1].clone()], None)
            }
            _ => return None,
        };
        Some(single(vec![x, y], kind, args, value))
    }
}

impl Default for ProblemBuilder {
    fn default() -> Self {
        Self::new()
    }
}

fn single(
    new_points: Vec<PointId>,
    kind: RelationKind,
    args: Vec<String>,
    value: Option<f64>,
) -> Clause {
    Clause {
        new_points,
        constraints: vec![Constraint {
            kind,
            args: args
                .into_iter()
                .map(|a| PointId::new(a).expect("existing names"))
                .collect(),
            value,
        }],
    }
}

pub fn sample_problem(cfg: &SamplerConfig) -> Problem {
    assert!(!cfg.object_pool.is_empty(), "object pool must be non-empty");
    assert!(
        !cfg.relation_pool.is_empty(),
        "relation pool must be non-empty"
    );
    assert!(
        cfg.n_clauses <= MAX_CLAUSES,
        "n_clauses must be in [0, {MAX_CLAUSES}]"
    );
    let mut r = rng(cfg.seed);
    let mut b = ProblemBuilder::new();
    let obj = *cfg.object_pool.choose(&mut r).expect("non-empty");
    b.add_object(obj);
    for i in 0..cfg.n_clauses {
        // Keep one point of room for every clause still to come.
        let remaining = cfg.n_clauses - i - 1;
        let max_new = MAX_POINTS.saturating_sub(b.points().len() + remaining);
        let added = b.add_random_clause(&cfg.relation_pool, cfg.angle_grid, max_new.max(1), &mut r);
        assert!(added, "sampling loop could not extend the problem");
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_problem, serialize_problem};

    #[test]
    fn zero_clauses_is_the_object() {
        let cfg = SamplerConfig {
            relation_pool: RelationKind::RELATIONS.to_vec(),
            object_pool: vec![RelationKind::Triangle],
            n_clauses: 0,
            seed: 123,
            angle_grid: AngleGrid::Free,
        };
        assert_eq!(
            serialize_problem(&sample_problem(&cfg)),
            "a b c = triangle a b c"
        );
    }

    #[test]
    fn deterministic_and_valid() {
        for seed in 0..200 {
            let cfg = SamplerConfig::full((seed % 9) as usize, seed);
            let p = sample_problem(&cfg);
            assert_eq!(p, sample_problem(&cfg));
            assert_eq!(p.clauses.len(), cfg.n_clauses + 1);
            p.validate().unwrap();
            assert_eq!(parse_problem(&serialize_problem(&p)).unwrap(), p);
            for c in &p.clauses[1..] {
                assert!((1..=2).contains(&c.new_points.len()));
            }
        }
    }

    #[test]
    fn benchmark_angle_grid() {
        let mut r = rng(1);
        for _ in 0..200 {
            let v = AngleGrid::Benchmark.sample(&mut r);
            assert!((15.0..=75.0).contains(&v) && v % 5.0 == 0.0);
        }
    }
}
