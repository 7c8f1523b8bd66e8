//! Reference implementations written against plain `Vec<u8>` rank vectors,
//! independent of the library's own enumeration and scoring code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use facework_core::agent::ItemReasons;
use facework_core::{AgentProfile, Move, ObjectId, Ranking};
use rand::Rng;

/// Every complete ranking of `n` objects into `slots` boxes (pool = slots + 1).
pub fn complete_rankings(n: usize, slots: u8) -> Vec<Vec<u8>> {
    let pool = slots + 1;
    let mut out = Vec::new();
    let mut cur = vec![pool; n];
    fn fill(box_rank: u8, slots: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if box_rank > slots {
            out.push(cur.clone());
            return;
        }
        for i in 0..cur.len() {
            if cur[i] == slots + 1 {
                cur[i] = box_rank;
                fill(box_rank + 1, slots, cur, out);
                cur[i] = slots + 1;
            }
        }
    }
    fill(1, slots, &mut cur, &mut out);
    debug_assert!(out
        .iter()
        .all(|r| r.iter().filter(|&&x| x != pool).count() == slots as usize));
    out
}

/// Every valid ranking, complete or not: each box holds at most one object.
pub fn all_rankings(n: usize, slots: u8) -> Vec<Vec<u8>> {
    let pool = slots + 1;
    let mut out = Vec::new();
    let total = (pool as usize).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let r: Vec<u8> = (0..n)
            .map(|_| {
                let v = (c % pool as usize) as u8 + 1;
                c /= pool as usize;
                v
            })
            .collect();
        let mut used = vec![false; pool as usize + 1];
        let ok = r.iter().all(|&x| {
            if x == pool {
                return true;
            }
            !std::mem::replace(&mut used[x as usize], true)
        });
        if ok {
            out.push(r);
        }
    }
    out
}

/// Footrule via the layer-cake identity: |a - b| = #thresholds t with
/// exactly one of a <= t, b <= t.
pub fn oracle_distance(a: &[u8], b: &[u8]) -> u32 {
    let top = a.iter().chain(b).copied().max().unwrap_or(0);
    let mut d = 0;
    for t in 1..top {
        for (x, y) in a.iter().zip(b) {
            if (*x <= t) != (*y <= t) {
                d += 1;
            }
        }
    }
    d
}

/// Unordered pairs whose rank differences have the same strict sign.
pub fn oracle_concordant(a: &[u8], b: &[u8]) -> u32 {
    let sign = |x: u8, y: u8| (x as i32 - y as i32).signum();
    let mut c = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if sign(a[i], a[j]) * sign(b[i], b[j]) > 0 {
                c += 1;
            }
        }
    }
    c
}

/// A move as a plain (object, orig, dest) triple.
pub type Triple = (u8, u8, u8);

pub fn triple(m: &Move) -> Triple {
    (m.object.get(), m.orig.get(), m.dest.get())
}

pub fn to_moves(ts: &[Triple]) -> Vec<Move> {
    ts.iter().map(|&(o, a, b)| Move::of(o, a, b)).collect()
}

/// Straight-line decorum rule for one move; `ra`/`rh` are 1-based-by-object rank vectors.
pub fn oracle_factor(
    m: Triple,
    human_last: &[Triple],
    agent_all: &[Triple],
    ra: &[u8],
    rh: &[u8],
) -> u8 {
    let (obj, _, dest) = m;
    for &(o, orig_h, _) in human_last {
        if o == obj && orig_h == dest {
            return 0;
        }
    }
    for &(o, _, dest_a) in agent_all {
        if o == obj && dest_a == dest {
            return 0;
        }
    }
    let idx = obj as usize - 1;
    if ra[idx] == dest && rh[idx] == dest {
        2
    } else {
        1
    }
}

pub fn oracle_action_factor(
    moves: &[Triple],
    human_last: &[Triple],
    agent_all: &[Triple],
    ra: &[u8],
    rh: &[u8],
) -> u8 {
    let fs: Vec<u8> = moves
        .iter()
        .map(|&m| oracle_factor(m, human_last, agent_all, ra, rh))
        .collect();
    if fs.contains(&0) {
        0
    } else {
        *fs.iter().max().unwrap()
    }
}

/// A successor state reached by one completeness-preserving exchange.
#[derive(Debug, Clone)]
pub struct BruteCandidate {
    pub moves: Vec<Triple>,
    pub next: Vec<u8>,
}

/// All exchanges of two objects at different ranks. On a complete ranking
/// these are exactly the single gestures that keep every box filled.
pub fn brute_exchanges(current: &[u8]) -> Vec<BruteCandidate> {
    let mut out = Vec::new();
    for i in 0..current.len() {
        for j in i + 1..current.len() {
            if current[i] == current[j] {
                continue;
            }
            let mut next = current.to_vec();
            next.swap(i, j);
            let mut moves = vec![
                (i as u8 + 1, current[i], current[j]),
                (j as u8 + 1, current[j], current[i]),
            ];
            moves.sort();
            out.push(BruteCandidate { moves, next });
        }
    }
    out
}

/// Brute-force best total `(C - D) * F` over surviving exchanges, or `None`
/// if every exchange is forbidden.
pub fn brute_best(
    current: &[u8],
    human_last: &[Triple],
    agent_all: &[Triple],
    ra: &[u8],
    rh: &[u8],
    facework: bool,
) -> (Option<i64>, Vec<(Vec<Triple>, i64)>) {
    let mut scored = Vec::new();
    for cand in brute_exchanges(current) {
        let f = if facework {
            oracle_action_factor(&cand.moves, human_last, agent_all, ra, rh)
        } else {
            1
        };
        if f == 0 {
            continue;
        }
        let total = (oracle_concordant(&cand.next, ra) as i64
            - oracle_distance(&cand.next, ra) as i64)
            * f as i64;
        scored.push((cand.moves, total));
    }
    (scored.iter().map(|s| s.1).max(), scored)
}

pub fn reasons_for(n: u8) -> BTreeMap<ObjectId, ItemReasons> {
    (1..=n)
        .map(|k| {
            (
                ObjectId::new(k).unwrap(),
                ItemReasons {
                    item: format!("item {k}"),
                    raise_reason: format!("Item {k} matters."),
                    lower_reason: format!("Item {k} matters less."),
                },
            )
        })
        .collect()
}

pub fn profile(pref: &Ranking, facework: bool, seed: u64) -> AgentProfile {
    AgentProfile::new(pref.clone(), reasons_for(pref.len() as u8))
        .unwrap()
        .with_facework(facework)
        .with_seed(seed)
}

/// Outcome of an exhaustive or sampled check.
#[derive(Debug, Default)]
pub struct Tally {
    pub cases: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.mismatches += 1;
            if self.first_mismatch.is_none() {
                self.first_mismatch = Some(detail());
            }
        }
    }
}

/// Every move x human history (<= 1 move) x agent history (<= 1 move) x
/// preference pair on the 4-object, 2-box instance, library vs oracle.
pub fn facework_rule_table() -> Tally {
    use facework_core::{facework_factor, MoveHistory};
    let (n, slots) = (4u8, 2u8);
    let pool = slots + 1;
    let mut moves = Vec::new();
    for o in 1..=n {
        for a in 1..=pool {
            for b in 1..=pool {
                if a != b {
                    moves.push((o, a, b));
                }
            }
        }
    }
    let mut hist_opts: Vec<Vec<Triple>> = vec![vec![]];
    hist_opts.extend(moves.iter().map(|&m| vec![m]));
    let prefs: Vec<(Vec<u8>, Ranking)> = complete_rankings(n as usize, slots)
        .into_iter()
        .map(|r| {
            let lib = Ranking::with_slots(slots, &r).unwrap();
            (r, lib)
        })
        .collect();

    let mut tally = Tally::default();
    for h in &hist_opts {
        for a in &hist_opts {
            let history = MoveHistory::new(to_moves(h), to_moves(a));
            for (ra, lra) in &prefs {
                for (rh, lrh) in &prefs {
                    for &m in &moves {
                        let got =
                            facework_factor(&Move::of(m.0, m.1, m.2), &history, lra, lrh) as u8;
                        let want = oracle_factor(m, h, a, ra, rh);
                        tally.check(got == want, || format!("move {m:?} human {h:?} agent {a:?} ra {ra:?} rh {rh:?}: got {got}, want {want}"));
                    }
                }
            }
        }
    }
    tally
}

/// Metric oracles over every ordered pair of complete 5-object, 3-box rankings.
pub fn metric_table() -> Tally {
    let all = complete_rankings(5, 3);
    let lib: Vec<Ranking> = all
        .iter()
        .map(|r| Ranking::with_slots(3, r).unwrap())
        .collect();
    let mut tally = Tally::default();
    for (a, la) in all.iter().zip(&lib) {
        for (b, lb) in all.iter().zip(&lib) {
            let d = facework_core::distance(la, lb).unwrap();
            let c = facework_core::concordant_pairs(la, lb).unwrap();
            let (od, oc) = (oracle_distance(a, b), oracle_concordant(a, b));
            tally.check(d == od && c == oc, || {
                format!("{a:?} vs {b:?}: D {d}/{od}, C {c}/{oc}")
            });
        }
    }
    tally
}

pub fn random_task_ranking(rng: &mut impl rand::Rng) -> Vec<u8> {
    use rand::seq::SliceRandom;
    let mut order: Vec<u8> = (1..=8).collect();
    order.shuffle(rng);
    let mut r = vec![6u8; 8];
    for (k, obj) in order.iter().take(5).enumerate() {
        r[*obj as usize - 1] = k as u8 + 1;
    }
    r
}

fn random_moves(rng: &mut impl rand::Rng, max: usize) -> Vec<Triple> {
    let k = rng.random_range(0..=max);
    (0..k)
        .map(|_| {
            let o = rng.random_range(1..=8u8);
            let a = rng.random_range(1..=6u8);
            let mut b = rng.random_range(1..=5u8);
            if b >= a {
                b += 1;
            }
            (o, a, b)
        })
        .collect()
}

/// Random 8-object states; the library's choice must carry the brute-force
/// maximum among surviving exchanges, or be a submit exactly when nothing
/// beats the status quo.
pub fn argmax_trials(trials: u64, seed: u64) -> Tally {
    use facework_core::agent::surviving_candidates;
    use facework_core::scoring::merit;
    use facework_core::{select_action, Decision, MoveHistory};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for trial in 0..trials {
        let cur = random_task_ranking(&mut rng);
        let ra = random_task_ranking(&mut rng);
        let rh = random_task_ranking(&mut rng);
        let human = random_moves(&mut rng, 4);
        let agent = random_moves(&mut rng, 8);
        let facework = rng.random_bool(0.75);

        let lcur = Ranking::task(&cur).unwrap();
        let lra = Ranking::task(&ra).unwrap();
        let lrh = Ranking::task(&rh).unwrap();
        let history = MoveHistory::new(to_moves(&human), to_moves(&agent));
        let prof = profile(&lra, facework, trial);

        let (best, scored) = brute_best(&cur, &human, &agent, &ra, &rh, facework);
        let status_quo = oracle_concordant(&cur, &ra) as i64 - oracle_distance(&cur, &ra) as i64;

        let mut lib_scored: Vec<(Vec<Triple>, i64)> =
            surviving_candidates(&lcur, &history, &lrh, &prof)
                .unwrap()
                .into_iter()
                .map(|c| {
                    let mut m: Vec<Triple> = c.action.moves().map(|m| triple(&m)).collect();
                    m.sort();
                    (m, c.score.total)
                })
                .collect();
        lib_scored.sort();
        let mut brute_sorted = scored.clone();
        brute_sorted.sort();

        let decision = select_action(&lcur, &history, &lrh, &prof).unwrap();
        let ok_choice = match (&decision, best) {
            (Decision::Propose(p), Some(t)) if t > status_quo => {
                let mut m: Vec<Triple> = p.action.moves().map(|m| triple(&m)).collect();
                m.sort();
                p.score.total == t && scored.iter().any(|(sm, st)| *sm == m && *st == t)
            }
            (Decision::Submit { status_quo: sq, .. }, best) => {
                *sq == status_quo && best.is_none_or(|t| t <= status_quo)
            }
            _ => false,
        };
        let ok =
            ok_choice && lib_scored == brute_sorted && merit(&lcur, &lra).unwrap() == status_quo;
        tally.check(ok, || {
            format!("trial {trial}: cur {cur:?} ra {ra:?} rh {rh:?} human {human:?} agent {agent:?} facework {facework}: {decision:?}, brute best {best:?}")
        });
    }
    tally
}
