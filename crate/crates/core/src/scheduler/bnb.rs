//! Depth-first branch and bound over arrival orders, last arrival first.

use std::collections::HashMap;
use std::time::Instant;

use super::table::{latest_free, BlockTable};
use crate::model::{Demand, DemandId, Network, NodeId, RouteId};
use crate::time::TimePoint;

const INF: i64 = i64::MAX / 4;

/// Pruning rules; each can be switched off for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rules {
    /// Discard a branch once some latest departure falls before the floor.
    pub negative_deadline: bool,
    /// Per-node aggregate occupancy test.
    pub node_capacity: bool,
    /// Place the latest demand alone when it cannot interfere with the rest.
    pub is_last: bool,
    /// Demands on one route arrive in deadline order.
    pub route_order: bool,
    /// Cost bound against the incumbent plus reuse of solved sub-branches.
    pub stored_branch: bool,
}

impl Rules {
    pub const ALL: Rules = Rules {
        negative_deadline: true,
        node_capacity: true,
        is_last: true,
        route_order: true,
        stored_branch: true,
    };
    pub const NONE: Rules = Rules {
        negative_deadline: false,
        node_capacity: false,
        is_last: false,
        route_order: false,
        stored_branch: false,
    };
}

impl Default for Rules {
    fn default() -> Self {
        Rules::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Stop after expanding this many search nodes. Deterministic.
    Nodes(u64),
    /// Stop after this much wall-clock time.
    Time(std::time::Duration),
    Exhaustive,
}

impl Default for Budget {
    fn default() -> Self {
        Budget::Time(std::time::Duration::from_secs(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BnbConfig {
    pub budget: Budget,
    pub rules: Rules,
    pub pool_size: usize,
    pub memo_size: usize,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            budget: Budget::default(),
            rules: Rules::ALL,
            pool_size: 64,
            memo_size: 1 << 17,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub nodes: u64,
    pub leaves: u64,
    /// Prune counts indexed by rule (1..=5 stored at 0..5).
    pub pruned: [u64; 5],
    pub memo_hits: u64,
    pub first_leaf_nodes: Option<u64>,
    pub first_leaf_time: Option<std::time::Duration>,
    pub elapsed: std::time::Duration,
    /// False when the budget ran out before the tree was closed.
    pub exhausted: bool,
}

/// One landing of a demand: offsets of its worst-case window from the departure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leg {
    pub node: usize,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub demand: DemandId,
    pub route: RouteId,
    pub deadline: i64,
    /// Latest departure meeting the deadline under worst-case travel.
    pub latest: i64,
    pub legs: Vec<Leg>,
}

/// Demands sorted ascending by (deadline, id) together with the spot
/// layout, reserved windows and the earliest allowed departure.
#[derive(Debug, Clone)]
pub struct Problem {
    pub jobs: Vec<Job>,
    pub nodes: Vec<NodeId>,
    pub spots: Vec<usize>,
    pub base: Vec<Vec<Vec<(i64, i64)>>>,
    pub floor: i64,
}

impl Problem {
    pub fn new(net: &Network, demands: &[Demand], table: &BlockTable, floor: TimePoint) -> Self {
        let mut sorted: Vec<&Demand> = demands.iter().collect();
        sorted.sort_by_key(|d| (d.deadline, d.id));
        let mut nodes: Vec<NodeId> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut jobs = Vec::with_capacity(sorted.len());
        for d in sorted {
            let route = net.route(d.route);
            let mut legs = Vec::with_capacity(route.len());
            for p in 1..=route.len() {
                let v = route.node(p);
                let node = match nodes.iter().position(|&n| n == v) {
                    Some(i) => i,
                    None => {
                        nodes.push(v);
                        counts.push(0);
                        nodes.len() - 1
                    }
                };
                counts[node] += 1;
                legs.push(Leg {
                    node,
                    lo: route.min_reach(p).0,
                    hi: (route.max_reach(p) + route.service(p)).0,
                });
            }
            jobs.push(Job {
                demand: d.id,
                route: d.route,
                deadline: d.deadline.0,
                latest: d.latest_departure(net).0,
                legs,
            });
        }
        let mut spots = Vec::with_capacity(nodes.len());
        let mut base = Vec::with_capacity(nodes.len());
        for (i, &v) in nodes.iter().enumerate() {
            let cap = if table.nodes().any(|n| n == v) {
                table.capacity(v)
            } else {
                net.capacity(v) as usize
            };
            let reserved: Vec<Vec<(i64, i64)>> = (0..cap as u32)
                .map(|c| {
                    table
                        .spot(v, c)
                        .iter()
                        .filter(|r| !r.interval.is_empty())
                        .map(|r| (r.interval.lo.0, r.interval.hi.0))
                        .collect()
                })
                .collect();
            if reserved.iter().all(Vec::is_empty) {
                spots.push(cap.min(counts[i]));
                base.push(vec![Vec::new(); cap.min(counts[i])]);
            } else {
                spots.push(cap);
                base.push(reserved);
            }
        }
        Problem {
            jobs,
            nodes,
            spots,
            base,
            floor: floor.0,
        }
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    fn has_base(&self, node: usize) -> bool {
        self.base[node].iter().any(|s| !s.is_empty())
    }
}

/// A complete branch: departures indexed like `Problem::jobs`, and the order
/// in which they were placed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub departures: Vec<i64>,
    pub order: Vec<usize>,
    pub sod: i64,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    /// Stored branches, best (lowest SoD) first.
    pub branches: Vec<Branch>,
    pub stats: SearchStats,
}

impl BnbResult {
    pub fn best(&self) -> Option<&Branch> {
        self.branches.first()
    }
}

#[derive(Clone)]
enum Memo {
    Exact(i64, Vec<(usize, i64)>),
    AtLeast(i64),
}

/// Departure and chosen spot per leg.
type Placement = (i64, Vec<usize>);

struct Outcome {
    best: Option<(i64, Vec<(usize, i64)>)>,
    bound: i64,
}

impl Outcome {
    fn infeasible() -> Self {
        Outcome {
            best: None,
            bound: INF,
        }
    }
}

struct Search<'a> {
    p: &'a Problem,
    cfg: BnbConfig,
    offsets: Vec<usize>,
    f: Vec<i64>,
    assigned: Vec<bool>,
    dep: Vec<i64>,
    order: Vec<usize>,
    prefix: i64,
    pool: Vec<Branch>,
    incumbent: i64,
    memo: HashMap<(Vec<u64>, Vec<i64>), Memo>,
    stats: SearchStats,
    start: Instant,
    aborted: bool,
}

/// Runs the search and returns the stored branches.
pub fn bnb_schedule(problem: &Problem, cfg: &BnbConfig) -> BnbResult {
    let mut offsets = Vec::with_capacity(problem.spots.len() + 1);
    offsets.push(0);
    for &s in &problem.spots {
        offsets.push(offsets.last().unwrap() + s);
    }
    let n = problem.len();
    let mut s = Search {
        p: problem,
        cfg: *cfg,
        f: vec![INF; *offsets.last().unwrap()],
        offsets,
        assigned: vec![false; n],
        dep: vec![0; n],
        order: Vec::with_capacity(n),
        prefix: 0,
        pool: Vec::new(),
        incumbent: INF,
        memo: HashMap::new(),
        stats: SearchStats::default(),
        start: Instant::now(),
        aborted: false,
    };
    s.dfs(n);
    s.stats.exhausted = !s.aborted;
    s.stats.elapsed = s.start.elapsed();
    s.pool.sort_by_key(|b| b.sod);
    BnbResult {
        branches: s.pool,
        stats: s.stats,
    }
}

impl Search<'_> {
    fn spots(&self, node: usize) -> std::ops::Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }

    fn max_f(&self, node: usize) -> i64 {
        self.f[self.spots(node)]
            .iter()
            .copied()
            .max()
            .unwrap_or(-INF)
    }

    /// Upper bound on the departure of job `j` under the current profile.
    fn ddl(&self, j: usize) -> i64 {
        let job = &self.p.jobs[j];
        job.legs
            .iter()
            .fold(job.latest, |d, leg| d.min(self.max_f(leg.node) - leg.hi))
    }

    fn fit(&self, leg: &Leg, spot: usize, upper: i64) -> i64 {
        let c = spot - self.offsets[leg.node];
        let upper = upper.min(self.f[spot] - leg.hi);
        latest_free(
            self.p.base[leg.node][c].iter().copied(),
            leg.lo,
            leg.hi,
            upper,
        )
    }

    /// Latest departure of `j` clear of the profile and the reserved windows,
    /// with the spot taken at each leg.
    fn place(&self, j: usize) -> Option<Placement> {
        let job = &self.p.jobs[j];
        let mut d = job.latest;
        loop {
            if d < self.p.floor {
                return None;
            }
            let mut next = d;
            for leg in &job.legs {
                let best = self
                    .spots(leg.node)
                    .map(|c| self.fit(leg, c, d))
                    .max()
                    .unwrap_or(-INF);
                next = next.min(best);
            }
            if next == d {
                break;
            }
            d = next;
        }
        let mut chosen = Vec::with_capacity(job.legs.len());
        for leg in &job.legs {
            let mut pick: Option<usize> = None;
            for c in self.spots(leg.node) {
                if self.fit(leg, c, d) == d && pick.is_none_or(|b| self.f[c] > self.f[b]) {
                    pick = Some(c);
                }
            }
            chosen.push(pick?);
        }
        Some((d, chosen))
    }

    fn over_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.aborted = match self.cfg.budget {
            Budget::Nodes(n) => self.stats.nodes > n,
            Budget::Time(t) => self.stats.nodes.is_multiple_of(256) && self.start.elapsed() >= t,
            Budget::Exhaustive => false,
        };
        self.aborted
    }

    fn record_leaf(&mut self, completion: &[(usize, i64)], cost: i64) {
        self.stats.leaves += 1;
        if self.stats.first_leaf_nodes.is_none() {
            self.stats.first_leaf_nodes = Some(self.stats.nodes);
            self.stats.first_leaf_time = Some(self.start.elapsed());
        }
        let sod = self.prefix + cost;
        self.incumbent = self.incumbent.min(sod);
        let cap = self.cfg.pool_size.max(1);
        if self.pool.len() >= cap {
            let worst = (0..self.pool.len())
                .max_by_key(|&i| (self.pool[i].sod, i))
                .expect("non-empty");
            if self.pool[worst].sod <= sod {
                return;
            }
            self.pool.remove(worst);
        }
        let mut departures = self.dep.clone();
        let mut order = self.order.clone();
        for &(j, d) in completion.iter().rev() {
            departures[j] = d;
            order.push(j);
        }
        self.pool.push(Branch {
            departures,
            order,
            sod,
        });
    }

    fn key(&self) -> (Vec<u64>, Vec<i64>) {
        let n = self.p.len();
        let mut bits = vec![0u64; n.div_ceil(64)];
        for j in (0..n).filter(|&j| !self.assigned[j]) {
            bits[j / 64] |= 1 << (j % 64);
        }
        let mut clip = vec![-INF; self.p.nodes.len()];
        for j in (0..n).filter(|&j| !self.assigned[j]) {
            let job = &self.p.jobs[j];
            for leg in &job.legs {
                clip[leg.node] = clip[leg.node].max(job.latest + leg.hi);
            }
        }
        let mut profile = Vec::with_capacity(self.f.len());
        for (v, &top) in clip.iter().enumerate() {
            let start = profile.len();
            profile.extend(self.f[self.spots(v)].iter().map(|&x| x.min(top)));
            if !self.p.has_base(v) {
                profile[start..].sort_unstable();
            }
        }
        (bits, profile)
    }

    /// Rules 1, 2 and the cost bound at a state. Returns the bound on the
    /// remaining cost, or `None` when the state is pruned as infeasible.
    fn screen(&mut self, ddl: &[i64]) -> Option<i64> {
        let rules = self.cfg.rules;
        let open: Vec<usize> = (0..self.p.len()).filter(|&j| !self.assigned[j]).collect();
        if rules.negative_deadline && open.iter().any(|&j| ddl[j] < self.p.floor) {
            self.stats.pruned[0] += 1;
            return None;
        }
        if rules.node_capacity && self.p.floor > -INF {
            for v in 0..self.p.nodes.len() {
                let mut need = 0i64;
                let mut count = 0usize;
                let mut lo = INF;
                let mut hi = -INF;
                for &j in &open {
                    if let Some(leg) = self.p.jobs[j].legs.iter().find(|l| l.node == v) {
                        need += leg.hi - leg.lo;
                        count += 1;
                        lo = lo.min(self.p.floor + leg.lo);
                        hi = hi.max(ddl[j] + leg.hi);
                    }
                }
                if count == 0 {
                    continue;
                }
                let mut room: Vec<i64> = self.f[self.spots(v)]
                    .iter()
                    .map(|&x| (x.min(hi) - lo).max(0))
                    .collect();
                room.sort_unstable_by(|a, b| b.cmp(a));
                let room: i64 = room.iter().take(count).sum();
                if need > room {
                    self.stats.pruned[1] += 1;
                    return None;
                }
            }
        }
        Some(
            open.iter()
                .map(|&j| self.p.jobs[j].deadline - ddl[j].min(self.p.jobs[j].latest))
                .sum(),
        )
    }

    /// Is-last check: after placing `j0` at `d` on `chosen`, every other demand
    /// still sees at least the next-free-before times it saw before.
    fn harmless(&self, j0: usize, chosen: &[usize], d: i64, ddl: &[i64]) -> bool {
        let job = &self.p.jobs[j0];
        for (leg, &spot) in job.legs.iter().zip(chosen) {
            let mut sup: Vec<i64> = (0..self.p.len())
                .filter(|&j| j != j0 && !self.assigned[j])
                .filter_map(|j| {
                    self.p.jobs[j]
                        .legs
                        .iter()
                        .find(|l| l.node == leg.node)
                        .map(|l| ddl[j] + l.hi)
                })
                .collect();
            if sup.is_empty() {
                continue;
            }
            let mut after: Vec<i64> = self
                .spots(leg.node)
                .map(|c| if c == spot { d + leg.lo } else { self.f[c] })
                .collect();
            let m = after.len().min(sup.len());
            sup.sort_unstable_by(|a, b| b.cmp(a));
            after.sort_unstable_by(|a, b| b.cmp(a));
            if (0..m).any(|k| after[k] < sup[k]) {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self, remaining: usize) -> Outcome {
        self.stats.nodes += 1;
        if self.over_budget() {
            return Outcome::infeasible();
        }
        if remaining == 0 {
            self.record_leaf(&[], 0);
            return Outcome {
                best: Some((0, Vec::new())),
                bound: 0,
            };
        }
        let rules = self.cfg.rules;
        let key = rules.stored_branch.then(|| self.key());
        if let Some(k) = &key {
            match self.memo.get(k).cloned() {
                Some(Memo::Exact(cost, completion)) => {
                    self.stats.memo_hits += 1;
                    if self.prefix + cost < self.incumbent {
                        self.record_leaf(&completion, cost);
                    }
                    return Outcome {
                        best: Some((cost, completion)),
                        bound: cost,
                    };
                }
                Some(Memo::AtLeast(bound)) if self.prefix + bound >= self.incumbent => {
                    self.stats.pruned[4] += 1;
                    return Outcome { best: None, bound };
                }
                _ => {}
            }
        }

        let n = self.p.len();
        let ddl: Vec<i64> = (0..n)
            .map(|j| if self.assigned[j] { 0 } else { self.ddl(j) })
            .collect();
        let Some(lower) = self.screen(&ddl) else {
            return self.finish(key, Outcome::infeasible());
        };
        if rules.stored_branch && self.prefix + lower >= self.incumbent {
            self.stats.pruned[4] += 1;
            return self.finish(
                key,
                Outcome {
                    best: None,
                    bound: lower,
                },
            );
        }

        let mut candidates: Vec<usize> = (0..n).rev().filter(|&j| !self.assigned[j]).collect();
        if rules.route_order {
            let before = candidates.len();
            let mut seen: Vec<RouteId> = Vec::new();
            candidates.retain(|&j| {
                let r = self.p.jobs[j].route;
                let first = !seen.contains(&r);
                seen.push(r);
                first
            });
            self.stats.pruned[3] += (before - candidates.len()) as u64;
        }
        let mut placed: Vec<(usize, Option<Placement>)> =
            candidates.iter().map(|&j| (j, None)).collect();
        if rules.is_last {
            let j0 = candidates[0];
            if let Some((d, chosen)) = self.place(j0) {
                if self.harmless(j0, &chosen, d, &ddl) {
                    self.stats.pruned[2] += (placed.len() - 1) as u64;
                    placed = vec![(j0, Some((d, chosen)))];
                } else {
                    placed[0].1 = Some((d, chosen));
                }
            }
        }

        let mut out = Outcome {
            best: None,
            bound: INF,
        };
        for (j, pre) in placed {
            let Some((d, chosen)) = pre.or_else(|| self.place(j)) else {
                continue;
            };
            let job = &self.p.jobs[j];
            let cost = job.deadline - d;
            let saved: Vec<(usize, i64)> = chosen.iter().map(|&c| (c, self.f[c])).collect();
            for (leg, &c) in job.legs.iter().zip(&chosen) {
                self.f[c] = d + leg.lo;
            }
            self.assigned[j] = true;
            self.dep[j] = d;
            self.order.push(j);
            self.prefix += cost;
            let child = self.dfs(remaining - 1);
            self.prefix -= cost;
            self.order.pop();
            self.assigned[j] = false;
            for &(c, x) in saved.iter().rev() {
                self.f[c] = x;
            }
            if self.aborted {
                return Outcome::infeasible();
            }
            if let Some((c, mut completion)) = child.best {
                if out.best.as_ref().is_none_or(|(b, _)| cost + c < *b) {
                    completion.push((j, d));
                    out.best = Some((cost + c, completion));
                }
            }
            out.bound = out.bound.min(cost.saturating_add(child.bound).min(INF));
        }
        if let Some((b, _)) = &out.best {
            out.bound = out.bound.min(*b);
        }
        self.finish(key, out)
    }

    fn finish(&mut self, key: Option<(Vec<u64>, Vec<i64>)>, out: Outcome) -> Outcome {
        if let Some(k) = key {
            if !self.aborted && self.memo.len() < self.cfg.memo_size {
                let entry = match &out.best {
                    Some((cost, completion)) if *cost <= out.bound => {
                        Memo::Exact(*cost, completion.clone())
                    }
                    _ => Memo::AtLeast(out.bound),
                };
                self.memo.insert(k, entry);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    fn exhaustive() -> BnbConfig {
        BnbConfig {
            budget: Budget::Exhaustive,
            ..BnbConfig::default()
        }
    }

    fn solve(net: &Network, demands: &[Demand], floor: TimePoint, cfg: &BnbConfig) -> BnbResult {
        let p = Problem::new(net, demands, &BlockTable::new(net), floor);
        bnb_schedule(&p, cfg)
    }

    #[test]
    fn single_demand_departs_at_latest() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let res = solve(&net, &[Demand::new(1, r, t(8))], t(0), &exhaustive());
        assert_eq!(res.branches.len(), 1);
        assert_eq!(res.best().unwrap().departures, vec![0]);
        assert_eq!(res.best().unwrap().sod, 8000);
    }

    #[test]
    fn same_route_pair_explores_one_order() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let demands = [Demand::new(2, r, t(16)), Demand::new(1, r, t(8))];
        let res = solve(&net, &demands, t(0), &exhaustive());
        assert_eq!(res.stats.leaves, 1);
        assert_eq!(res.best().unwrap().departures, vec![0, 8000]);
    }

    #[test]
    fn infeasible_pair_is_empty() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let demands = [Demand::new(1, r, t(8)), Demand::new(2, r, t(8))];
        let res = solve(&net, &demands, t(0), &exhaustive());
        assert!(res.branches.is_empty());
        assert!(res.stats.pruned[1] + res.stats.pruned[0] > 0);
        let res = solve(
            &net,
            &demands,
            t(0),
            &BnbConfig {
                rules: Rules::NONE,
                ..exhaustive()
            },
        );
        assert!(res.branches.is_empty());
    }

    #[test]
    fn example_pair_is_infeasible_at_time_zero() {
        let net = cases::two_link();
        let demands = cases::two_link_demands(&net);
        assert!(solve(&net, &demands, t(0), &exhaustive())
            .branches
            .is_empty());
        let loose = solve(&net, &demands, TimePoint::NEG_INF, &exhaustive());
        assert_eq!(loose.best().unwrap().departures, vec![-2000, 3000]);
    }

    #[test]
    fn node_budget_stops_early() {
        let net = cases::atlanta();
        let demands = cases::atlanta_demands(&net);
        let res = solve(
            &net,
            &demands,
            TimePoint::NEG_INF,
            &BnbConfig {
                budget: Budget::Nodes(50),
                ..BnbConfig::default()
            },
        );
        assert!(!res.stats.exhausted);
        assert!(res.stats.nodes <= 51);
    }
}
