//! Exhaustive expectimax for small robot-only shopping games.
//!
//! The human never changes the bag (absent, or present but unable to pick),
//! so the robot's problem is an MDP over (bag, step, robot-capability counts)
//! with the reward averaged over a uniform list prior. Written from the
//! problem definition; shares no code with the planner.

#![allow(dead_code)]

use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct Game {
    pub lists: Vec<Vec<u32>>,
    pub horizon: u32,
    /// True robot success probability per item.
    pub robot: Vec<f64>,
    pub gamma: f64,
    pub calibration_weight: f64,
    pub excess_penalty: f64,
    /// Whether the robot may signal.
    pub signals: bool,
}

/// Robot move in the oracle's own encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Pick(usize),
    Idle,
    Signal(usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    bag: Vec<u32>,
    step: u32,
    /// (successes, failures) per item, starting from (1, 0).
    counts: Vec<(u32, u32)>,
}

pub struct Solution {
    /// Q value of every root move.
    pub root: Vec<(Move, f64)>,
}

impl Solution {
    pub fn best(&self) -> (Move, f64) {
        self.root.iter().copied().fold((Move::Idle, f64::NEG_INFINITY), |b, m| if m.1 > b.1 { m } else { b })
    }

    /// Distance between the best and second-best root values.
    pub fn margin(&self) -> f64 {
        let mut v: Vec<f64> = self.root.iter().map(|m| m.1).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v[0] - v[1]
    }

    pub fn value_of(&self, m: Move) -> f64 {
        self.root.iter().find(|(x, _)| *x == m).unwrap().1
    }
}

impl Game {
    fn items(&self) -> usize {
        self.robot.len()
    }

    fn moves(&self) -> Vec<Move> {
        let n = self.items();
        let mut m: Vec<Move> = (0..n).map(Move::Pick).collect();
        m.push(Move::Idle);
        if self.signals {
            m.extend((0..n).map(Move::Signal));
        }
        m
    }

    fn list_reward(&self, bag: &[u32], list: &[u32]) -> f64 {
        let mut got = 0.0;
        let mut over = 0.0;
        for (&b, &r) in bag.iter().zip(list) {
            got += b.min(r) as f64;
            over += b.saturating_sub(r) as f64;
        }
        (got - self.excess_penalty * over) / list.iter().sum::<u32>() as f64
    }

    fn calibration(&self, counts: &[(u32, u32)]) -> f64 {
        let total: f64 = counts
            .iter()
            .zip(&self.robot)
            .map(|(&(s, f), &p)| {
                let q = s as f64 / (s + f) as f64;
                q.min(p) + (1.0 - q).min(1.0 - p)
            })
            .sum();
        self.calibration_weight * total / counts.len() as f64
    }

    fn entry_reward(&self, key: &Key) -> f64 {
        let mut r = self.calibration(&key.counts);
        if key.step == self.horizon {
            r += self.lists.iter().map(|l| self.list_reward(&key.bag, l)).sum::<f64>() / self.lists.len() as f64;
        }
        r
    }

    /// Outcomes of `m` from `key`: (probability, next state).
    fn branches(&self, key: &Key, m: Move) -> Vec<(f64, Key)> {
        let mut next = key.clone();
        next.step += 1;
        match m {
            Move::Idle => vec![(1.0, next)],
            Move::Signal(i) => {
                next.counts[i].1 += 1;
                vec![(1.0, next)]
            }
            Move::Pick(i) => {
                let p = self.robot[i];
                let mut ok = next.clone();
                ok.bag[i] += 1;
                ok.counts[i].0 += 1;
                let mut bad = next;
                bad.counts[i].1 += 1;
                vec![(p, ok), (1.0 - p, bad)].into_iter().filter(|(q, _)| *q > 0.0).collect()
            }
        }
    }

    fn q(&self, key: &Key, m: Move, memo: &mut HashMap<Key, f64>) -> f64 {
        self.branches(key, m)
            .into_iter()
            .map(|(p, next)| p * (self.entry_reward(&next) + self.gamma * self.value(&next, memo)))
            .sum()
    }

    fn value(&self, key: &Key, memo: &mut HashMap<Key, f64>) -> f64 {
        if key.step == self.horizon {
            return 0.0;
        }
        if let Some(&v) = memo.get(key) {
            return v;
        }
        let v = self.moves().into_iter().map(|m| self.q(key, m, memo)).fold(f64::NEG_INFINITY, f64::max);
        memo.insert(key.clone(), v);
        v
    }

    pub fn solve(&self) -> Solution {
        let n = self.items();
        let root = Key { bag: vec![0; n], step: 0, counts: vec![(1, 0); n] };
        let mut memo = HashMap::new();
        let root = self.moves().into_iter().map(|m| (m, self.q(&root, m, &mut memo))).collect();
        Solution { root }
    }
}
