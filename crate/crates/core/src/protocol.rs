//! Evaluation protocol: predict one link from several observed sets and
//! tabulate the relative m.s.e. of each.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kriging::{evaluate_rmse, KrigingModel};
use crate::linalg::SolveMethod;
use crate::scalar::Real;
use crate::topology::RoutingMatrix;
use crate::trace::{format_f64, TraceSet};

/// Internet2 link predicted in the reference sweep (Kansas City to Chicago).
pub const INTERNET2_TARGET: usize = 13;

/// Observed link sets of the reference sweep on Internet2.
pub const INTERNET2_SWEEP_SETS: [&[usize]; 12] = [
    &[3, 7],
    &[7, 9],
    &[9, 12],
    &[12, 17],
    &[17, 21],
    &[3, 21],
    &[3, 7, 9],
    &[3, 7, 9, 12],
    &[3, 7, 9, 12, 17],
    &[3, 7, 9, 12, 17, 21],
    &[3, 5, 7, 9, 11, 12, 17, 21],
    &[3, 5, 7, 9, 11, 12, 17, 21, 23, 25],
];

pub fn internet2_sweep_sets() -> Vec<Vec<usize>> {
    INTERNET2_SWEEP_SETS.iter().map(|s| s.to_vec()).collect()
}

/// Per-bin prediction of one target link from one observed set.
#[derive(Debug, Clone, PartialEq)]
pub struct KrigeRun<T: Real> {
    pub observed: Vec<usize>,
    pub target: usize,
    pub actual: Vec<T>,
    pub predicted: Vec<T>,
    /// Model prediction standard deviation (constant over bins).
    pub std: T,
    pub solve: SolveMethod,
}

impl<T: Real> KrigeRun<T> {
    /// `sum (Ŷ - Y)^2 / sum Y^2`.
    pub fn relative_mse(&self) -> Result<T> {
        evaluate_rmse(&self.predicted, &self.actual)
    }

    /// Mean squared prediction error over the bins.
    pub fn empirical_mse(&self) -> T {
        let n = T::from_count(self.actual.len());
        self.actual
            .iter()
            .zip(&self.predicted)
            .fold(T::zero(), |a, (&y, &p)| a + (p - y) * (p - y))
            / n
    }

    /// Writes `timestamp,actual,predicted,lower,upper` with bounds at `confidence`.
    pub fn write_csv<W: Write>(&self, traces: &TraceSet<T>, confidence: f64, w: W) -> Result<()> {
        let z = crate::kriging::gaussian_quantile(confidence);
        let half = self.std.as_f64() * z;
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["timestamp", "actual", "predicted", "lower", "upper"])?;
        for (b, (&y, &p)) in self.actual.iter().zip(&self.predicted).enumerate() {
            let p = p.as_f64();
            wtr.write_record([
                format_f64(traces.timestamp(b)),
                format_f64(y.as_f64()),
                format_f64(p),
                format_f64(p - half),
                format_f64(p + half),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Predicts `target` in every bin of `links` from the `observed` links.
pub fn krige_target<T: Real>(
    routing: &RoutingMatrix,
    links: &TraceSet<T>,
    mu_x: &DVector<T>,
    sigma_x: &DVector<T>,
    target: usize,
    observed: &[usize],
) -> Result<KrigeRun<T>> {
    if observed.contains(&target) {
        return Err(invalid(
            "observed",
            format!("target link {target} is part of the observed set"),
        ));
    }
    let model = KrigingModel::fit(routing, observed, mu_x, sigma_x)?;
    let pos = model
        .unobserved_position(target)
        .ok_or(crate::Error::UnknownLink(target))?;
    let y_o = links.select(observed)?;
    let actual = links.row(target)?;
    let mu_o = model.mu_o();
    let mu_t = model.mu_u()[pos];
    let gain = model.gain.row(pos).transpose();
    let predicted = (0..links.num_bins())
        .map(|b| mu_t + (y_o.column(b) - &mu_o).dot(&gain))
        .collect();
    Ok(KrigeRun {
        observed: observed.to_vec(),
        target,
        actual,
        predicted,
        std: model.mse_instant[(pos, pos)].max(T::zero()).sqrt(),
        solve: model.solve,
    })
}

/// One summary row per observed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub number_of_links: usize,
    pub link_labels: Vec<usize>,
    pub relative_mse: f64,
    pub empirical_mse: f64,
    pub theoretical_mse: f64,
    pub solve: SolveMethod,
}

pub fn krige_sweep<T: Real>(
    routing: &RoutingMatrix,
    links: &TraceSet<T>,
    mu_x: &DVector<T>,
    sigma_x: &DVector<T>,
    target: usize,
    observed_sets: &[Vec<usize>],
) -> Result<(Vec<SweepRow>, Vec<KrigeRun<T>>)> {
    let mut rows = Vec::with_capacity(observed_sets.len());
    let mut runs = Vec::with_capacity(observed_sets.len());
    for set in observed_sets {
        let run = krige_target(routing, links, mu_x, sigma_x, target, set)?;
        rows.push(SweepRow {
            number_of_links: set.len(),
            link_labels: set.clone(),
            relative_mse: run.relative_mse()?.as_f64(),
            empirical_mse: run.empirical_mse().as_f64(),
            theoretical_mse: (run.std * run.std).as_f64(),
            solve: run.solve,
        });
        runs.push(run);
    }
    Ok((rows, runs))
}

/// Writes `number_of_links,link_labels,relative_mse`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["number_of_links", "link_labels", "relative_mse"])?;
    for r in rows {
        let labels: Vec<String> = r.link_labels.iter().map(|l| l.to_string()).collect();
        wtr.write_record([
            r.number_of_links.to_string(),
            labels.join(","),
            format_f64(r.relative_mse),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceKind;
    use nalgebra::DMatrix;

    #[test]
    fn summary_csv_quotes_labels() {
        let rows = vec![SweepRow {
            number_of_links: 2,
            link_labels: vec![3, 7],
            relative_mse: 0.25,
            empirical_mse: 1.0,
            theoretical_mse: 1.0,
            solve: SolveMethod::Cholesky,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "number_of_links,link_labels,relative_mse\n2,\"3,7\",0.25\n"
        );
    }

    #[test]
    fn exact_combination_has_zero_rmse() {
        let r = RoutingMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let routes = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, 0.5, 0.0, 2.0, 1.0]);
        let links = r.apply_series(&routes).unwrap();
        let ts = TraceSet::new(1.0, 0.0, links, vec![1, 2, 3], TraceKind::Link).unwrap();
        let mu = DVector::from_vec(vec![2.0, 1.0]);
        let sx = DVector::from_vec(vec![1.0, 1.0]);
        let (rows, _) = krige_sweep(&r, &ts, &mu, &sx, 3, &[vec![1, 2], vec![1]]).unwrap();
        assert!(rows[0].relative_mse < 1e-20);
        assert!(rows[1].relative_mse > 0.0);
        assert!(krige_target(&r, &ts, &mu, &sx, 3, &[3]).is_err());
        assert!(krige_target(&r, &ts, &mu, &sx, 3, &[9]).is_err());
    }
}
