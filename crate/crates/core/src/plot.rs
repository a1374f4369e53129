//! Static figures: log-log convergence curves (SVG) and error heatmaps (PNG).

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Grid;
use crate::problems::Problem;
use crate::solve::Solution;
use crate::study::{exact_at, ConvergenceReport};

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Relative l2 and max-norm errors against h on log-log axes.
pub fn write_convergence_svg(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let pts: Vec<(f64, f64, f64)> = report
        .levels
        .iter()
        .filter(|l| l.eps_l2 > 0.0 && l.err_max > 0.0)
        .map(|l| (l.h, l.eps_l2, l.err_max))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidOption("no levels to plot".into()));
    }
    let (hmin, hmax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (emin, emax) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1.min(p.2)), b.max(p.1.max(p.2))));
    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{} ({})", report.problem, report.scheme), ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(
            (hmin / 1.5..hmax * 1.5).log_scale(),
            (emin / 3.0..emax * 3.0).log_scale(),
        )
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("h")
        .y_desc("error")
        .y_label_formatter(&|v| format!("{v:.0e}"))
        .draw()
        .map_err(plot_err)?;
    let series = [("relative l2", 1usize, &BLUE), ("max", 2usize, &RED)];
    for (label, idx, color) in series {
        let line: Vec<(f64, f64)> =
            pts.iter().map(|p| (p.0, if idx == 1 { p.1 } else { p.2 })).collect();
        chart
            .draw_series(LineSeries::new(line.clone(), color))
            .map_err(plot_err)?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        chart
            .draw_series(line.iter().map(|&(x, y)| Circle::new((x, y), 3, color.filled())))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Map t in [0, 1] to a blue-to-yellow ramp.
fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let stops = [[13.0, 8.0, 135.0], [204.0, 71.0, 120.0], [240.0, 249.0, 33.0]];
    let s = t * 2.0;
    let (a, b, f) = if s < 1.0 { (stops[0], stops[1], s) } else { (stops[1], stops[2], s - 1.0) };
    [0, 1, 2].map(|k| (a[k] + (b[k] - a[k]) * f).round() as u8)
}

/// Heatmap of log10 |u_h - u| over the grid, one pixel block per node.
pub fn write_error_png(path: &Path, problem: &dyn Problem, grid: &Grid, sol: &Solution) -> Result<()> {
    let (w, h) = (grid.n1 + 1, grid.n2 + 1);
    let logs: Vec<f64> = (0..h)
        .flat_map(|j| (0..w).map(move |i| (i, j)))
        .map(|(i, j)| (sol.at(i, j) - exact_at(problem, grid, i, j)).abs().max(1e-300).log10())
        .collect();
    let hi = logs.iter().cloned().fold(f64::MIN, f64::max);
    let lo = (hi - 8.0).max(logs.iter().cloned().fold(f64::MAX, f64::min));
    let block = (512 / w.max(h)).max(1) as u32;
    let mut img = image::RgbImage::new(w as u32 * block, h as u32 * block);
    for (k, v) in logs.iter().enumerate() {
        let (i, j) = ((k % w) as u32, (k / w) as u32);
        let c = image::Rgb(ramp(if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }));
        // Row j = 0 at the bottom of the image.
        let py = (h as u32 - 1 - j) * block;
        for dy in 0..block {
            for dx in 0..block {
                img.put_pixel(i * block + dx, py + dy, c);
            }
        }
    }
    img.save(path).map_err(plot_err)
}
