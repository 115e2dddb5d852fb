// SPDX-License-Identifier: Apache-2.0
#![allow(clippy::excessive_precision)]

//! Airy functions `Ai`, `Bi` and their derivatives on the real line.
//!
//! Inside `|s| < 9` the values come from Taylor continuation of the ODE
//! `y″ = s y`, started from the exact values at the origin (or, for the
//! decaying `Ai` on `s > 2`, from its asymptotic value at `s = 9` and
//! stepped backwards so that the continuation runs in the stable
//! direction). For `9 ≤ |s| ≤ 30` the standard asymptotic expansions are
//! summed up to their smallest term.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::{Error, Result};

/// Largest `|s|` accepted by [`airy`].
pub const AIRY_LIMIT: f64 = 30.0;

const ASYMPTOTIC_START: f64 = 9.0;
/// Beyond this `Ai` is continued backwards from the asymptotic anchor.
const AI_BACKWARD_START: f64 = 2.0;
const MAX_STEP: f64 = 0.25;

const AI0: f64 = 0.355_028_053_887_817_24;
const AI0_PRIME: f64 = -0.258_819_403_792_806_8;
const BI0: f64 = 0.614_926_627_446_000_7;
const BI0_PRIME: f64 = 0.448_288_357_353_826_36;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryValues {
    /// `Ai Bi′ − Ai′ Bi`, which equals `1/π`.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Evaluates `Ai(s)`, `Ai′(s)`, `Bi(s)`, `Bi′(s)` for `|s| ≤ 30`.
pub fn airy(s: f64) -> Result<AiryValues> {
    if !(s.abs() <= AIRY_LIMIT) {
        return Err(Error::Range { s, limit: AIRY_LIMIT });
    }
    if s >= ASYMPTOTIC_START {
        let (ai, ai_prime, bi, bi_prime) = asymptotic_positive(s);
        return Ok(AiryValues { ai, ai_prime, bi, bi_prime });
    }
    if s <= -ASYMPTOTIC_START {
        let (ai, ai_prime, bi, bi_prime) = asymptotic_negative(-s);
        return Ok(AiryValues { ai, ai_prime, bi, bi_prime });
    }
    let (bi, bi_prime) = propagate(0.0, BI0, BI0_PRIME, s);
    let (ai, ai_prime) = if s > AI_BACKWARD_START {
        let (ai9, ai9_prime, _, _) = asymptotic_positive(ASYMPTOTIC_START);
        propagate(ASYMPTOTIC_START, ai9, ai9_prime, s)
    } else {
        propagate(0.0, AI0, AI0_PRIME, s)
    };
    Ok(AiryValues { ai, ai_prime, bi, bi_prime })
}

/// Carries `(y, y′)` of a solution of `y″ = s y` from `from` to `to`.
fn propagate(from: f64, mut y: f64, mut dy: f64, to: f64) -> (f64, f64) {
    let span = to - from;
    if span == 0.0 {
        return (y, dy);
    }
    let steps = (span.abs() / MAX_STEP).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    for k in 0..steps {
        let s0 = from + k as f64 * h;
        (y, dy) = taylor_step(s0, y, dy, h);
    }
    (y, dy)
}

/// One Taylor step of `y″ = s y` about `s0`.
fn taylor_step(s0: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    // a[k] are the Taylor coefficients; only the last three are needed.
    let mut a_km1 = y; // a[k-1]
    let mut a_k = dy; // a[k]
    let a2 = 0.5 * s0 * y;
    let mut value = y + dy * h + a2 * h * h;
    let mut slope = dy + 2.0 * a2 * h;
    let mut a_kp1 = a2; // a[k+1]
    let mut hk = h * h; // h^(k+1)
    let scale = y.abs() + dy.abs();
    let mut small = 0;
    // k runs over the index of a[k]; next coefficient is a[k+2].
    for k in 1..80 {
        let next = (s0 * a_k + a_km1) / ((k + 1) as f64 * (k + 2) as f64);
        let hk_prev = hk;
        hk *= h;
        let term = next * hk;
        value += term;
        slope += (k + 2) as f64 * next * hk_prev;
        a_km1 = a_k;
        a_k = a_kp1;
        a_kp1 = next;
        if term.abs() <= 1e-18 * (value.abs() + scale) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (value, slope)
}

/// Coefficients `u_k`, `v_k` of the asymptotic expansions.
fn asymptotic_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    u.push(1.0);
    v.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let prev = u[k - 1];
        let uk = (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf) * prev;
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

const SERIES_TERMS: usize = 40;

/// Sums `Σ sign^k c_k / ζ^k` over indices `k ≡ parity (mod 2)`, stopping at
/// the smallest term.
fn optimal_sum(c: &[f64], zeta: f64, alternating: bool, parity: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut power = 1.0;
    let mut sign = 1.0;
    for (k, ck) in c.iter().enumerate() {
        if k > 0 {
            power /= zeta;
        }
        if k % 2 != parity {
            continue;
        }
        let term = ck * power;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += sign * term;
        if alternating {
            sign = -sign;
        }
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn asymptotic_positive(s: f64) -> (f64, f64, f64, f64) {
    let (u, v) = asymptotic_coefficients(SERIES_TERMS);
    let zeta = 2.0 / 3.0 * s.powf(1.5);
    let quarter = s.powf(0.25);
    let decay = (-zeta).exp() / (2.0 * PI.sqrt());
    let growth = zeta.exp() / PI.sqrt();
    // Alternating sums written over every index.
    let alt = |c: &[f64]| {
        let even = optimal_sum(c, zeta, false, 0);
        let odd = optimal_sum(c, zeta, false, 1);
        (even - odd, even + odd)
    };
    let (u_alt, u_sum) = alt(&u);
    let (v_alt, v_sum) = alt(&v);
    (
        decay / quarter * u_alt,
        -decay * quarter * v_alt,
        growth / quarter * u_sum,
        growth * quarter * v_sum,
    )
}

fn asymptotic_negative(x: f64) -> (f64, f64, f64, f64) {
    let (u, v) = asymptotic_coefficients(SERIES_TERMS);
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let quarter = x.powf(0.25);
    let (sin, cos) = (zeta - FRAC_PI_4).sin_cos();
    let pre = 1.0 / PI.sqrt();
    let u_even = optimal_sum(&u, zeta, true, 0);
    let u_odd = optimal_sum(&u, zeta, true, 1);
    let v_even = optimal_sum(&v, zeta, true, 0);
    let v_odd = optimal_sum(&v, zeta, true, 1);
    (
        pre / quarter * (cos * u_even + sin * u_odd),
        pre * quarter * (sin * v_even - cos * v_odd),
        pre / quarter * (-sin * u_even + cos * u_odd),
        pre * quarter * (cos * v_even + sin * v_odd),
    )
}
