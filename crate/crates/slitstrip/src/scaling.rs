//! Convergence of discrete inner products and fusion ratios to their continuum values.

use crate::continuum::ContinuumInnerProducts;
use crate::discrete_cx::{Extremity, SlitData};
use crate::error::{domain, Error, Result};
use crate::fusion::{DirectFusion, FusionKey, PoleInnerProducts, RecursiveFusion};
use crate::geometry::StripGeometry;
use crate::par::Exec;
use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

/// Widths up to which the direct route validates the recursion.
pub const DIRECT_VALIDATION_MAX: usize = 12;

/// Agreement required between the two discrete routes.
pub const DIRECT_TOL: f64 = 1e-9;

/// Largest width accepted by the harness.
pub const MAX_SCHEDULE_WIDTH: usize = 512;

/// Strip geometries `(a_n, b_n)` with increasing widths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WidthSchedule {
    pub entries: Vec<(i32, i32)>,
}

impl WidthSchedule {
    /// `(-l/2, l/2)` for each even width.
    pub fn balanced(widths: &[usize]) -> Result<Self> {
        let entries = widths
            .iter()
            .map(|&l| if l % 2 == 0 { Ok((-(l as i32) / 2, l as i32 / 2)) } else { domain(format!("width {l} is odd")) })
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(entries)
    }

    pub fn explicit(entries: Vec<(i32, i32)>) -> Result<Self> {
        if entries.is_empty() {
            return domain("empty schedule");
        }
        let mut prev = 0;
        for &(a, b) in &entries {
            if !(a < 0 && 0 < b) {
                return domain(format!("({a}, {b}) does not straddle the slit"));
            }
            let l = (b - a) as usize;
            if l <= prev || l > MAX_SCHEDULE_WIDTH {
                return domain(format!("width {l} breaks the increasing schedule or exceeds {MAX_SCHEDULE_WIDTH}"));
            }
            prev = l;
        }
        let dev = |&(a, b): &(i32, i32)| (a as f64 / (b - a) as f64 + 0.5).abs();
        let (first, last) = (dev(&entries[0]), dev(entries.last().expect("non-empty")));
        if entries.len() > 1 && last > first && last > 0.0 {
            return domain("the slit drifts away from the centre along the schedule");
        }
        Ok(Self { entries })
    }

    pub fn widths(&self) -> Vec<usize> {
        self.entries.iter().map(|&(a, b)| (b - a) as usize).collect()
    }
}

/// `<e^a_{k'}, P^b_k>` with signed `k'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct InnerProductId {
    pub a: Extremity,
    pub k2p: i32,
    pub b: Extremity,
    pub k2: i32,
}

fn letter(e: Extremity) -> char {
    match e {
        Extremity::Top => 'T',
        Extremity::Left => 'L',
        Extremity::Right => 'R',
    }
}

impl fmt::Display for InnerProductId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ip[{}{}/2,{}{}/2]", letter(self.a), self.k2p, letter(self.b), self.k2)
    }
}

impl InnerProductId {
    /// Entries used by the recursion: `k' < 0` at the top and `k' > 0` in the legs.
    pub fn recursion_set(max_k2: i32) -> Vec<Self> {
        use Extremity::*;
        let mut v = Vec::new();
        for b in [Top, Left, Right] {
            for k2 in (1..=max_k2).step_by(2) {
                for a in [Top, Left, Right] {
                    for kp in (1..=max_k2).step_by(2) {
                        v.push(Self { a, k2p: if a == Top { -kp } else { kp }, b, k2 });
                    }
                }
            }
        }
        v
    }

    fn max_index(&self) -> i32 {
        self.k2p.abs().max(self.k2)
    }
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    Fusion(FusionKey),
    InnerProduct(InnerProductId),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Fusion(k) => write!(f, "B[{}]", k.encode()),
            Quantity::InnerProduct(ip) => write!(f, "{ip}"),
        }
    }
}

/// One width and one quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub width: usize,
    pub quantity: String,
    pub discrete: f64,
    pub continuum: f64,
    pub gap: f64,
}

/// All rows plus the direct-route validation record.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `(width, largest |direct - recursive|)` for the validated widths.
    pub direct_checks: Vec<(usize, f64)>,
}

impl ConvergenceTable {
    /// Rows of one quantity in width order.
    pub fn series(&self, quantity: &str) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.quantity == quantity).collect()
    }

    pub fn quantities(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.quantity) {
                seen.push(r.quantity.clone());
            }
        }
        seen
    }

    /// CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
        w.write_record(["width", "quantity", "discrete", "continuum", "gap"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.width.to_string(),
                r.quantity.clone(),
                format!("{:.16e}", r.discrete),
                format!("{:.16e}", r.continuum),
                format!("{:.16e}", r.gap),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Discrete values of all quantities at one geometry.
fn discrete_at(
    geom: StripGeometry,
    keys: &[FusionKey],
    ips: &[InnerProductId],
    exec: Exec,
) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>, Option<f64>)> {
    let data = Arc::new(SlitData::new(geom)?);
    let rec = RecursiveFusion::new(data.clone());
    let fits = |k: &FusionKey| rec.check(k).is_ok();
    let fusion: Vec<Option<f64>> =
        keys.iter().map(|k| if fits(k) { rec.value(k).map(Some) } else { Ok(None) }).collect::<Result<_>>()?;
    let ipv: Vec<Option<f64>> = ips
        .iter()
        .map(|id| {
            let ok = id.k2p.unsigned_abs() < 2 * data.width_of(id.a) as u32 && (id.k2 as u32) < 2 * data.width_of(id.b) as u32;
            if ok {
                data.ip(id.a, id.k2p, id.b, id.k2).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let check = if geom.width() <= DIRECT_VALIDATION_MAX {
        let direct = DirectFusion::with_data(data.clone(), exec)?;
        let mut worst = 0.0f64;
        for (k, v) in keys.iter().zip(&fusion) {
            if let Some(v) = v {
                worst = worst.max((direct.ratio(k)? - v).abs());
            }
        }
        if worst > DIRECT_TOL {
            return Err(Error::Numerical(format!("direct and recursive ratios differ by {worst:e} at width {}", geom.width())));
        }
        Some(worst)
    } else {
        None
    };
    Ok((fusion, ipv, check))
}

/// Discrete versus continuum values for every scheduled width.
pub fn run_convergence(
    schedule: &WidthSchedule,
    keys: &[FusionKey],
    ips: &[InnerProductId],
    exec: Exec,
) -> Result<ConvergenceTable> {
    let max_k2 = keys
        .iter()
        .flat_map(|k| k.alpha.twice().iter().chain(k.beta_left.twice()).chain(k.beta_right.twice()).copied())
        .chain(ips.iter().map(|i| i.max_index()))
        .max()
        .unwrap_or(1);
    let cont = Arc::new(ContinuumInnerProducts::new(max_k2)?);
    let crec = RecursiveFusion::new(cont.clone());
    let key_targets: Vec<f64> = keys.iter().map(|k| crec.value(k)).collect::<Result<_>>()?;
    let ip_targets: Vec<f64> = ips.iter().map(|i| cont.ip(i.a, i.k2p, i.b, i.k2)).collect::<Result<_>>()?;

    let geoms = schedule.entries.iter().map(|&(a, b)| StripGeometry::new(a, b)).collect::<Result<Vec<_>>>()?;
    // Widths run as independent jobs; inner passes stay sequential.
    let per_width = exec.map(&geoms, |&g| discrete_at(g, keys, ips, Exec::Sequential));
    let mut table = ConvergenceTable::default();
    for (g, res) in geoms.iter().zip(per_width) {
        let (fusion, ipv, check) = res?;
        let width = g.width();
        if let Some(c) = check {
            table.direct_checks.push((width, c));
        }
        for ((k, d), &c) in keys.iter().zip(fusion).zip(&key_targets) {
            if let Some(d) = d {
                table.rows.push(ConvergenceRow { width, quantity: Quantity::Fusion(k.clone()).to_string(), discrete: d, continuum: c, gap: (d - c).abs() });
            }
        }
        for ((id, d), &c) in ips.iter().zip(ipv).zip(&ip_targets) {
            if let Some(d) = d {
                table.rows.push(ConvergenceRow { width, quantity: Quantity::InnerProduct(*id).to_string(), discrete: d, continuum: c, gap: (d - c).abs() });
            }
        }
    }
    Ok(table)
}

/// Extrapolation from two widths assuming a leading `1/l` error.
pub fn richardson(l1: usize, v1: f64, l2: usize, v2: f64) -> f64 {
    let (l1, l2) = (l1 as f64, l2 as f64);
    (l2 * v2 - l1 * v1) / (l2 - l1)
}

/// Extrapolation from three widths assuming an error `(a + b ln l)/l`.
pub fn log_richardson(points: [(usize, f64); 3]) -> Result<f64> {
    use nalgebra::{Matrix3, Vector3};
    let m = Matrix3::from_fn(|r, c| {
        let l = points[r].0 as f64;
        [l, 1.0, l.ln()][c]
    });
    let rhs = Vector3::from_fn(|r, _| points[r].0 as f64 * points[r].1);
    let x = m.lu().solve(&rhs).ok_or_else(|| Error::Numerical("degenerate widths".into()))?;
    Ok(x[0])
}

/// True when every gap is strictly smaller than the one before.
pub fn strictly_decreasing(gaps: &[f64]) -> bool {
    gaps.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolations_are_exact_on_their_models() {
        let f = |l: f64| 0.3 + 2.0 / l;
        assert!((richardson(32, f(32.0), 64, f(64.0)) - 0.3).abs() < 1e-14);
        let g = |l: f64| -0.7 + (1.5 + 0.4 * l.ln()) / l;
        let v = log_richardson([(16, g(16.0)), (32, g(32.0)), (64, g(64.0))]).unwrap();
        assert!((v + 0.7).abs() < 1e-12);
    }

    #[test]
    fn schedules_are_validated() {
        assert_eq!(WidthSchedule::balanced(&[4, 8]).unwrap().widths(), vec![4, 8]);
        assert!(WidthSchedule::balanced(&[5]).is_err());
        assert!(WidthSchedule::balanced(&[8, 4]).is_err());
        assert!(WidthSchedule::explicit(vec![(0, 4)]).is_err());
        assert!(WidthSchedule::explicit(vec![(-2, 2), (-1, 7)]).is_err());
    }
}
