//! Result files: CSV tables and the SVG figures drawn from them.
//!
//! Plots are built from CSV files alone, so archived results can be re-plotted
//! without any model state.

mod csv;
mod plot;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use self::csv::{
    attractor_table, emit_csv, epoch_table, format_g, length_table, CsvTable, ATTRACTOR_COLUMNS,
    EPOCH_COLUMNS, LENGTH_COLUMNS,
};
pub use plot::{render_plot, Axes, Series};

/// One standard figure: which files it reads and which columns it plots.
struct Figure {
    name: &'static str,
    suffix: &'static str,
    x: &'static str,
    y: &'static str,
    reversed_x: bool,
}

const FIGURES: [Figure; 6] = [
    Figure { name: "trainloss", suffix: "_epochs.csv", x: "epoch", y: "trainloss", reversed_x: false },
    Figure { name: "testloss", suffix: "_epochs.csv", x: "epoch", y: "testloss", reversed_x: false },
    Figure { name: "accuracy", suffix: "_epochs.csv", x: "epoch", y: "accuracy", reversed_x: false },
    Figure { name: "error_vs_trainloss", suffix: "_epochs.csv", x: "trainloss", y: "maxErrRate", reversed_x: true },
    Figure { name: "attractors", suffix: "_attractors.csv", x: "metric", y: "accuracy", reversed_x: false },
    Figure { name: "lengths", suffix: "_lengths.csv", x: "p", y: "acc", reversed_x: false },
];

/// Renders every standard figure for which `dir` holds CSV files, grouping
/// runs by task prefix (`cross-serial_urn32_epochs.csv` joins the
/// `cross-serial` figures as series `urn32`). Returns the SVG paths written.
pub fn render_directory(dir: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    for fig in &FIGURES {
        let mut groups: Vec<(String, Vec<Series>)> = Vec::new();
        for path in &files {
            let Some(stem) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(fig.suffix))
            else {
                continue;
            };
            let (task, model) = stem.rsplit_once('_').unwrap_or(("run", stem));
            let series = Series::from_table(&CsvTable::load(path)?, fig.x, fig.y, model)?;
            match groups.iter_mut().find(|(t, _)| t == task) {
                Some((_, v)) => v.push(series),
                None => groups.push((task.to_string(), vec![series])),
            }
        }
        for (task, series) in groups {
            let axes = Axes {
                title: format!("{task}: {} vs {}", fig.y, fig.x),
                x_label: fig.x.into(),
                y_label: fig.y.into(),
                reversed_x: fig.reversed_x,
                ..Axes::default()
            };
            let path = out.join(format!("{task}_{}.svg", fig.name));
            std::fs::write(&path, render_plot(&series, &axes)).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_render_groups_by_task() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
        write("dyck_urn8_epochs.csv", "epoch,trainloss,testloss,accuracy,maxErrRate\n1,2,2,0.5,0.6\n2,1,1,0.7,0.4\n");
        write("dyck_lstm8_epochs.csv", "epoch,trainloss,testloss,accuracy,maxErrRate\n1,2,2,0.4,0.7\n");
        write("dyck_urn8_attractors.csv", "metric,accuracy\n0,0.9\n1,0.8\n");
        write("notes.txt", "ignored");
        let out = dir.path().join("plots");
        let written = render_directory(dir.path(), &out).unwrap();
        assert_eq!(written.len(), 5);
        let svg = std::fs::read_to_string(out.join("dyck_accuracy.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">urn8<") && svg.contains(">lstm8<"));
    }

    #[test]
    fn malformed_csv_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x_urn8_epochs.csv"), "epoch,loss\n1,2\n").unwrap();
        assert!(render_directory(dir.path(), dir.path()).is_err());
    }
}
