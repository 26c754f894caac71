use rand::Rng as _;
use rand_distr::{Distribution, Exp, Geometric};
use serde::{Deserialize, Serialize};

use super::rng::{self, purpose};
use super::{Instance, PacketRequest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceDist {
    /// Uniform on `1..=n−1`.
    Uniform,
    /// `1 + Geometric(p)`, clamped to `n−1`.
    Geometric { p: f64 },
    Fixed { d: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    #[serde(rename = "B")]
    pub buffer: u32,
    #[serde(rename = "c")]
    pub link: u32,
    #[serde(rename = "M")]
    pub requests: usize,
    /// Expected number of new requests per time step.
    pub arrival_rate: f64,
    pub distance: DistanceDist,
    /// When set, every request gets a deadline `t + d + U{0..=slack}`.
    #[serde(default)]
    pub deadline_slack: Option<i64>,
}

/// Random instance: Poisson arrivals starting at time 1, distance from `distance`,
/// source uniform among the nodes that leave room for that distance.
pub fn gen_random_instance(p: &GenParams, seed: u64) -> Result<Instance> {
    if p.n < 2 || p.buffer < 1 || p.link < 1 {
        return Err(Error::Validation("need n >= 2, B >= 1, c >= 1".into()));
    }
    if !(p.arrival_rate > 0.0) {
        return Err(Error::Validation("arrival_rate must be positive".into()));
    }
    let max_d = p.n as i64 - 1;
    let geometric = match p.distance {
        DistanceDist::Geometric { p: q } => Some(
            Geometric::new(q).map_err(|e| Error::Validation(format!("geometric p: {e}")))?,
        ),
        DistanceDist::Fixed { d } if !(1..=max_d).contains(&d) => {
            return Err(Error::Validation(format!("fixed distance {d} outside 1..={max_d}")))
        }
        _ => None,
    };
    if matches!(p.deadline_slack, Some(s) if s < 0) {
        return Err(Error::Validation("deadline_slack must be >= 0".into()));
    }
    let gaps = Exp::new(p.arrival_rate).map_err(|e| Error::Validation(e.to_string()))?;
    let mut rng = rng::stream(seed, purpose::GENERATOR, 0);
    let mut clock = 0.0f64;
    let mut requests = Vec::with_capacity(p.requests);
    for id in 0..p.requests {
        clock += gaps.sample(&mut rng);
        let t = 1 + clock.floor() as i64;
        let d = match p.distance {
            DistanceDist::Uniform => rng.random_range(1..=max_d),
            DistanceDist::Geometric { .. } => {
                let g = geometric.as_ref().expect("validated").sample(&mut rng);
                (1 + g.min(max_d as u64) as i64).min(max_d)
            }
            DistanceDist::Fixed { d } => d,
        };
        let a = rng.random_range(0..=max_d - d);
        let mut r = PacketRequest::new(id, a, a + d, t);
        if let Some(slack) = p.deadline_slack {
            r.deadline = Some(t + d + rng.random_range(0..=slack));
        }
        requests.push(r);
    }
    let inst = Instance {
        n: p.n,
        buffer: p.buffer,
        link: p.link,
        requests,
    };
    inst.validate()?;
    Ok(inst)
}
