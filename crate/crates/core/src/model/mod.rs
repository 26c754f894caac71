//! Problem instances, algorithm constants, request categories and instance I/O.

mod consts;
mod generate;
mod io;
pub mod rng;

pub use consts::{beta, chernoff_tail, chernoff_tail_ratio, lambda, rectangle_overload_bound};
pub use generate::{gen_random_instance, DistanceDist, GenParams};
pub use io::{load_instance, save_instance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A packet that is ready at node `a` at time `t` and wants to reach node `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PacketRequest {
    pub id: usize,
    pub a: i64,
    pub b: i64,
    pub t: i64,
    /// Soft deadline on the arrival time.
    pub deadline: Option<i64>,
}

impl PacketRequest {
    pub fn new(id: usize, a: i64, b: i64, t: i64) -> Self {
        Self {
            id,
            a,
            b,
            t,
            deadline: None,
        }
    }

    pub fn with_deadline(mut self, deadline: i64) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn distance(&self) -> i64 {
        self.b - self.a
    }

    /// False when the deadline precedes the earliest possible arrival `t + (b − a)`.
    pub fn is_servable(&self) -> bool {
        self.deadline
            .is_none_or(|dl| dl >= self.t + self.distance())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    /// Node buffer capacity `B`.
    pub buffer: u32,
    /// Link capacity `c`.
    pub link: u32,
    pub requests: Vec<PacketRequest>,
}

impl Instance {
    /// Builds an instance, assigning dense ids in the given order.
    pub fn new(n: usize, buffer: u32, link: u32, reqs: &[(i64, i64, i64)]) -> Result<Self> {
        let requests = reqs
            .iter()
            .enumerate()
            .map(|(id, &(a, b, t))| PacketRequest::new(id, a, b, t))
            .collect();
        let inst = Self {
            n,
            buffer,
            link,
            requests,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Request with the given id. Ids are dense, so this is an index lookup after validation.
    pub fn request(&self, id: usize) -> &PacketRequest {
        let r = &self.requests[id];
        if r.id == id {
            r
        } else {
            self.requests
                .iter()
                .find(|r| r.id == id)
                .expect("request ids are dense")
        }
    }

    /// Requests ordered by id.
    pub fn by_id(&self) -> Vec<PacketRequest> {
        let mut v = self.requests.clone();
        v.sort_by_key(|r| r.id);
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!("n must be >= 2, got {}", self.n)));
        }
        if self.buffer < 1 {
            return Err(Error::Validation("B must be >= 1".into()));
        }
        if self.link < 1 {
            return Err(Error::Validation("c must be >= 1".into()));
        }
        let n = self.n as i64;
        let mut seen = vec![false; self.requests.len()];
        for (pos, r) in self.requests.iter().enumerate() {
            let ctx = format!("request #{pos} (id {})", r.id);
            if r.a < 0 || r.a >= n {
                return Err(Error::Validation(format!("{ctx}: a={} outside [0, {}]", r.a, n - 1)));
            }
            if r.b < 0 || r.b >= n {
                return Err(Error::Validation(format!("{ctx}: b={} outside [0, {}]", r.b, n - 1)));
            }
            if r.b <= r.a {
                return Err(Error::Validation(format!(
                    "{ctx}: b > a violated (a={}, b={})",
                    r.a, r.b
                )));
            }
            if r.t < 1 {
                return Err(Error::Validation(format!("{ctx}: t >= 1 violated (t={})", r.t)));
            }
            if r.id >= seen.len() || seen[r.id] {
                return Err(Error::Validation(format!(
                    "{ctx}: ids must be unique and dense in 0..{}",
                    seen.len()
                )));
            }
            seen[r.id] = true;
        }
        Ok(())
    }

    /// Ids of requests whose deadline cannot be met even by forwarding immediately.
    pub fn unservable(&self) -> Vec<usize> {
        self.requests
            .iter()
            .filter(|r| !r.is_servable())
            .map(|r| r.id)
            .collect()
    }
}

/// Distance thresholds splitting requests into categories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// `3·ln n`
    pub ell_m: f64,
    /// `3·ln(3·ln n)`
    pub ell_s: f64,
    /// `ln(ell_s)`, used when `min(B, c) > 1`.
    pub ell_vs: f64,
}

impl Thresholds {
    /// Raw threshold values for `n ≥ 2`, without checking that they are ordered.
    pub fn raw(n: usize) -> Self {
        let ell_m = 3.0 * (n as f64).ln();
        let ell_s = 3.0 * ell_m.ln();
        let ell_vs = ell_s.ln();
        Self { ell_m, ell_s, ell_vs }
    }

    /// Thresholds usable for the category split; requires `ell_s < ell_m`, i.e. `n ≥ 5`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("thresholds need n >= 3, got {n}")));
        }
        let th = Self::raw(n);
        if th.ell_s >= th.ell_m {
            return Err(Error::Domain(format!(
                "ell_S = {:.3} >= ell_M = {:.3} at n = {n}; category split is degenerate",
                th.ell_s, th.ell_m
            )));
        }
        Ok(th)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    VeryShort,
    Short,
    Medium,
    Long,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::VeryShort,
        Category::Short,
        Category::Medium,
        Category::Long,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::VeryShort => "very_short",
            Category::Short => "short",
            Category::Medium => "medium",
            Category::Long => "long",
        }
    }
}

pub fn categorize(req: &PacketRequest, th: &Thresholds, very_short_mode: bool) -> Category {
    let d = req.distance() as f64;
    if very_short_mode && d <= th.ell_vs {
        Category::VeryShort
    } else if d <= th.ell_s {
        Category::Short
    } else if d <= th.ell_m {
        Category::Medium
    } else {
        Category::Long
    }
}
