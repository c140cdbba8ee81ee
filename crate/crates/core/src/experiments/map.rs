use std::fmt::Write as _;
use std::path::Path;

use crate::analytic;
use crate::error::{Error, Result};
use crate::format;
use crate::model::ModelParams;
use crate::propagator::IntegratorOptions;

use super::scan::{check_axis, parabola_vertex, pulse_endpoint};
use super::SweepEngine;

/// ⟨S_z⟩ at the end of the pulse over a `(V_dc, V_rf)` grid.
#[derive(Clone, Debug)]
pub struct HeatMap {
    pub v_dc: Vec<f64>,
    pub v_rf: Vec<f64>,
    /// Row-major: `sz[i * v_rf.len() + j]` belongs to `(v_dc[i], v_rf[j])`.
    pub sz: Vec<f64>,
    /// Initial ⟨S_z⟩ per `v_dc` row.
    pub sz_initial: Vec<f64>,
    /// Predicted resonances `(n, V_n)` inside the `v_dc` range.
    pub overlay: Vec<(i32, f64)>,
    pub frequency: f64,
    pub t_pump: f64,
}

/// Evaluates the full grid; any failing cell aborts the whole map.
#[allow(clippy::too_many_arguments)]
pub fn map2d(
    params: &ModelParams,
    v_dc_axis: &[f64],
    v_rf_axis: &[f64],
    f: f64,
    t_pump: f64,
    opts: &IntegratorOptions,
    engine: &SweepEngine,
) -> Result<HeatMap> {
    check_axis("v_dc_axis", v_dc_axis)?;
    check_axis("v_rf_axis", v_rf_axis)?;
    if v_rf_axis[0] < 0.0 {
        return Err(Error::domain("v_rf_axis", "RF amplitudes must be >= 0"));
    }
    if !(t_pump >= 0.0) || !t_pump.is_finite() {
        return Err(Error::domain(
            "t_pump",
            format!("must be finite and >= 0, got {t_pump}"),
        ));
    }
    opts.validate()?;

    let cols = v_rf_axis.len();
    let cells = engine.run(v_dc_axis.len() * cols, |k| {
        let (i, j) = (k / cols, k % cols);
        pulse_endpoint(params, v_dc_axis[i], v_rf_axis[j], f, t_pump, opts)
    })?;

    let n_max = (params.kappa() * v_dc_axis[0].abs().max(v_dc_axis[v_dc_axis.len() - 1].abs()) / f)
        .ceil() as usize
        + 1;
    let (lo, hi) = (v_dc_axis[0], v_dc_axis[v_dc_axis.len() - 1]);
    let overlay = analytic::resonance_voltages(params, f, n_max.max(1))?
        .into_iter()
        .filter(|&(_, v)| v >= lo && v <= hi)
        .collect();

    Ok(HeatMap {
        v_dc: v_dc_axis.to_vec(),
        v_rf: v_rf_axis.to_vec(),
        sz: cells.iter().map(|c| c.0).collect(),
        sz_initial: cells.iter().step_by(cols).map(|c| c.1).collect(),
        overlay,
        frequency: f,
        t_pump,
    })
}

/// Fixed diverging ramp: −2 → blue, 0 → white, +2 → red.
pub fn diverging_color(sz: f64) -> (u8, u8, u8) {
    let t = (sz / 2.0).clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * (1.0 - t.abs())).round() as u8;
    if t < 0.0 {
        (fade(t), fade(t), 255)
    } else {
        (255, fade(t), fade(t))
    }
}

impl HeatMap {
    pub fn get(&self, i_dc: usize, j_rf: usize) -> f64 {
        self.sz[i_dc * self.v_rf.len() + j_rf]
    }

    /// `|⟨S_z⟩ − ⟨S_z⟩_initial|` at a cell.
    pub fn flip(&self, i_dc: usize, j_rf: usize) -> f64 {
        (self.get(i_dc, j_rf) - self.sz_initial[i_dc]).abs()
    }

    pub fn dc_step(&self) -> f64 {
        self.v_dc
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    fn rows_within(&self, center: f64, half_width: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.v_dc.len()).filter(move |&i| (self.v_dc[i] - center).abs() <= half_width)
    }

    /// Largest flip within `center ± half_width` in column `j_rf`.
    pub fn fringe_amplitude(&self, center: f64, half_width: f64, j_rf: usize) -> f64 {
        self.rows_within(center, half_width)
            .map(|i| self.flip(i, j_rf))
            .fold(0.0, f64::max)
    }

    /// Position of the flip maximum within `center ± half_width` in column
    /// `j_rf`, refined quadratically when it is interior to the grid.
    pub fn fringe_center(&self, center: f64, half_width: f64, j_rf: usize) -> Option<f64> {
        let best = self
            .rows_within(center, half_width)
            .max_by(|&a, &b| self.flip(a, j_rf).total_cmp(&self.flip(b, j_rf)))?;
        if best == 0 || best + 1 == self.v_dc.len() {
            return Some(self.v_dc[best]);
        }
        let x = [self.v_dc[best - 1], self.v_dc[best], self.v_dc[best + 1]];
        let y = [
            self.flip(best - 1, j_rf),
            self.flip(best, j_rf),
            self.flip(best + 1, j_rf),
        ];
        Some(parabola_vertex(x, y).0)
    }

    /// Column whose fringe near `center` is strongest.
    pub fn strongest_column(&self, center: f64, half_width: f64) -> usize {
        (0..self.v_rf.len())
            .max_by(|&a, &b| {
                self.fringe_amplitude(center, half_width, a)
                    .total_cmp(&self.fringe_amplitude(center, half_width, b))
            })
            .unwrap_or(0)
    }

    pub fn nearest_rf_column(&self, v_rf: f64) -> usize {
        (0..self.v_rf.len())
            .min_by(|&a, &b| {
                (self.v_rf[a] - v_rf)
                    .abs()
                    .total_cmp(&(self.v_rf[b] - v_rf).abs())
            })
            .unwrap_or(0)
    }

    /// Header row of `v_rf` values after a `v_dc` label; one row per `v_dc`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("v_dc");
        for v in &self.v_rf {
            let _ = write!(out, ",{}", format::csv(*v));
        }
        out.push('\n');
        for (i, v) in self.v_dc.iter().enumerate() {
            out.push_str(&format::csv(*v));
            for j in 0..self.v_rf.len() {
                let _ = write!(out, ",{}", format::csv(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    /// One predicted resonance per line: `n,v_dc`.
    pub fn overlay_string(&self) -> String {
        let mut out = String::from("n,v_dc\n");
        for (n, v) in &self.overlay {
            let _ = writeln!(out, "{n},{}", format::csv(*v));
        }
        out
    }

    /// Standalone SVG: `V_rf` along x, `V_dc` along y (increasing upward),
    /// predicted resonances as dashed green horizontal lines.
    pub fn to_svg(&self) -> String {
        const CELL: f64 = 3.0;
        const MARGIN: f64 = 60.0;
        let (nx, ny) = (self.v_rf.len(), self.v_dc.len());
        let width = MARGIN * 2.0 + CELL * nx as f64;
        let height = MARGIN * 2.0 + CELL * ny as f64;
        let y_of = |i: usize| MARGIN + CELL * (ny - 1 - i) as f64;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
        for i in 0..ny {
            for j in 0..nx {
                let (r, g, b) = diverging_color(self.get(i, j));
                let _ = writeln!(
                    s,
                    r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                    MARGIN + CELL * j as f64,
                    y_of(i)
                );
            }
        }
        let _ = writeln!(s, "</g>");

        let (lo, hi) = (self.v_dc[0], self.v_dc[ny - 1]);
        let plot_h = CELL * ny as f64;
        for (n, v) in &self.overlay {
            let y = MARGIN + plot_h * (1.0 - (v - lo) / (hi - lo));
            let _ = writeln!(
                s,
                r#"<line x1="{MARGIN}" x2="{}" y1="{y:.3}" y2="{y:.3}" stroke="green" stroke-width="1.5" stroke-dasharray="6,4"><title>n = {n}</title></line>"#,
                MARGIN + CELL * nx as f64
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">V_rf (V): {} to {}</text>"#,
            width / 2.0,
            height - 20.0,
            format::sig(self.v_rf[0], 4),
            format::sig(self.v_rf[nx - 1], 4)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">V_dc (V): {} to {}</text>"#,
            height / 2.0,
            height / 2.0,
            format::sig(lo, 4),
            format::sig(hi, 4)
        );
        s.push_str("</svg>\n");
        s
    }

    /// Writes `map.csv` and `resonances.txt`, plus `map.svg` when asked.
    pub fn write_dir(&self, dir: &Path, svg: bool) -> Result<()> {
        let mut files = vec![
            ("map.csv", self.to_csv_string()),
            ("resonances.txt", self.overlay_string()),
        ];
        if svg {
            files.push(("map.svg", self.to_svg()));
        }
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::linspace;

    #[test]
    fn color_ramp_ends() {
        assert_eq!(diverging_color(-2.0), (0, 0, 255));
        assert_eq!(diverging_color(0.0), (255, 255, 255));
        assert_eq!(diverging_color(2.0), (255, 0, 0));
        assert_eq!(diverging_color(5.0), (255, 0, 0));
    }

    #[test]
    fn small_map_layout() {
        let p = ModelParams::paper();
        let map = map2d(
            &p,
            &linspace(-0.2, 0.2, 5),
            &linspace(0.0, 0.3, 3),
            0.5,
            4.0,
            &IntegratorOptions::default(),
            &SweepEngine::serial(),
        )
        .unwrap();
        assert_eq!(map.sz.len(), 15);
        assert!(map.sz.iter().all(|v| (-2.0..=2.0).contains(v)));
        assert_eq!(
            map.overlay.iter().map(|o| o.0).collect::<Vec<_>>(),
            vec![-1, 1]
        );
        // V_rf = 0 column is static
        for i in 0..5 {
            assert!((map.get(i, 0) - map.sz_initial[i]).abs() < 1e-10);
        }
        let csv = map.to_csv_string();
        let first: Vec<_> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(first, vec!["v_dc", "0", "0.15", "0.3"]);
        assert_eq!(csv.lines().count(), 6);
        assert!(map.to_svg().contains("stroke-dasharray"));
        assert!(map2d(
            &p,
            &[0.0, 0.1],
            &[-0.1, 0.1],
            0.5,
            4.0,
            &IntegratorOptions::default(),
            &SweepEngine::serial()
        )
        .is_err());
    }
}
