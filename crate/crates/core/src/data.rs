//! Datasets: CSV ingestion, the Gaussian-mixture generator, and seeded center
//! initialization.
//!
//! All randomness comes from [`seeded_rng`], a ChaCha8 stream keyed by a `u64`
//! seed; nothing reads global RNG state.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::envelope::{CenterConfig, Dataset};
use crate::error::{Error, Result};

/// Generator tag recorded in every report.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub dataset: Dataset,
    /// Ground-truth class ids, contiguous from 0.
    pub labels: Option<Vec<usize>>,
    /// Original label text, indexed by class id.
    pub label_names: Vec<String>,
}

impl LabeledDataset {
    pub fn class_count(&self) -> Option<usize> {
        self.labels.as_ref().map(|_| self.label_names.len())
    }

    /// Write as CSV with a header row and, when present, the label column last.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
        self.write_csv_to(&mut out).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let dim = self.dataset.dim();
        let mut header: Vec<String> = if dim == 2 {
            vec!["x".into(), "y".into()]
        } else {
            (1..=dim).map(|c| format!("x{c}")).collect()
        };
        if self.labels.is_some() {
            header.push("label".into());
        }
        writeln!(out, "{}", header.join(","))?;
        for (i, p) in self.dataset.points().enumerate() {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            match &self.labels {
                Some(labels) => writeln!(out, "{},{}", row.join(","), self.label_names[labels[i]])?,
                None => writeln!(out, "{}", row.join(","))?,
            }
        }
        Ok(())
    }

    /// Standardize every feature to zero mean and unit (population) variance.
    /// Constant features are only centered.
    pub fn zscore(&mut self) {
        let dim = self.dataset.dim();
        let m = self.dataset.len() as f64;
        let mut mean = vec![0.0; dim];
        for p in self.dataset.points() {
            for (s, x) in mean.iter_mut().zip(p) {
                *s += x;
            }
        }
        mean.iter_mut().for_each(|s| *s /= m);
        let mut var = vec![0.0; dim];
        for p in self.dataset.points() {
            for ((v, x), mu) in var.iter_mut().zip(p).zip(&mean) {
                *v += (x - mu) * (x - mu);
            }
        }
        let scale: Vec<f64> = var
            .iter()
            .map(|v| {
                let sd = (v / m).sqrt();
                if sd > 0.0 {
                    1.0 / sd
                } else {
                    1.0
                }
            })
            .collect();
        for row in self.dataset.as_flat_mut().chunks_exact_mut(dim) {
            for ((x, mu), s) in row.iter_mut().zip(&mean).zip(&scale) {
                *x = (*x - mu) * s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanLayout {
    /// Means evenly spaced on a circle of this radius around the origin
    /// (first two coordinates; remaining coordinates zero).
    Circle { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub k_true: usize,
    pub points_per_cluster: usize,
    pub noise_std: f64,
    pub dim: usize,
    pub mean_layout: MeanLayout,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            k_true: 6,
            points_per_cluster: 50,
            noise_std: 0.3,
            dim: 2,
            mean_layout: MeanLayout::Circle { radius: 3.0 },
            seed: 2026,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_true == 0 || self.points_per_cluster == 0 {
            return Err(Error::param("cluster count and points per cluster must be positive"));
        }
        if self.dim < 2 {
            return Err(Error::param("synthetic data needs at least two dimensions"));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::param("noise std must be nonnegative"));
        }
        let MeanLayout::Circle { radius } = self.mean_layout;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("layout radius must be positive"));
        }
        Ok(())
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        let MeanLayout::Circle { radius } = self.mean_layout;
        (0..self.k_true)
            .map(|c| {
                let angle = TAU * c as f64 / self.k_true as f64;
                let mut mean = vec![0.0; self.dim];
                mean[0] = radius * angle.cos();
                mean[1] = radius * angle.sin();
                mean
            })
            .collect()
    }
}

/// Isotropic Gaussian mixture; points are emitted cluster by cluster.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let mut coords = Vec::with_capacity(spec.k_true * spec.points_per_cluster * spec.dim);
    let mut labels = Vec::with_capacity(spec.k_true * spec.points_per_cluster);
    for (c, mean) in spec.means().iter().enumerate() {
        for _ in 0..spec.points_per_cluster {
            for &mu in mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                coords.push(mu + spec.noise_std * z);
            }
            labels.push(c);
        }
    }
    Ok(LabeledDataset {
        name: "synthetic".into(),
        dataset: Dataset::from_flat(spec.dim, coords)?,
        labels: Some(labels),
        label_names: (0..spec.k_true).map(|c| c.to_string()).collect(),
    })
}

/// Which CSV column holds class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::param("empty label column"));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Load a comma-separated file of numeric features with an optional label
/// column. A first row containing a non-numeric feature field is a header.
pub fn load_csv(path: &Path, label_column: Option<&LabelColumn>) -> Result<LabeledDataset> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    read_csv(file, path, &name, label_column)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    path: &Path,
    name: &str,
    label_column: Option<&LabelColumn>,
) -> Result<LabeledDataset> {
    let load_err = |line: usize, message: String| Error::Load { path: path.to_path_buf(), line, message };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            load_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record));
    }
    let Some((first_line, first)) = rows.first() else {
        return Err(load_err(1, "file contains no rows".into()));
    };
    let width = first.len();

    let mut label_idx = match label_column {
        Some(LabelColumn::Index(i)) if *i >= width => {
            return Err(load_err(*first_line, format!("label column {i} out of range for {width} columns")))
        }
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Name(_)) | None => None,
    };
    let is_header = match label_column {
        Some(LabelColumn::Name(_)) => true,
        _ => first
            .iter()
            .enumerate()
            .any(|(c, f)| Some(c) != label_idx && f.parse::<f64>().is_err()),
    };
    if let Some(LabelColumn::Name(n)) = label_column {
        label_idx = Some(
            first
                .iter()
                .position(|f| f == n)
                .ok_or_else(|| load_err(*first_line, format!("no column named '{n}' in header")))?,
        );
    }
    if width < 1 + usize::from(label_idx.is_some()) {
        return Err(load_err(*first_line, "no feature columns".into()));
    }

    let dim = width - usize::from(label_idx.is_some());
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut label_names = Vec::new();
    for (line, record) in rows.iter().skip(usize::from(is_header)) {
        if record.len() != width {
            return Err(load_err(*line, format!("expected {width} fields, found {}", record.len())));
        }
        for (c, field) in record.iter().enumerate() {
            if Some(c) == label_idx {
                let next = ids.len();
                let id = *ids.entry(field.to_string()).or_insert_with(|| {
                    label_names.push(field.to_string());
                    next
                });
                labels.push(id);
            } else {
                let x: f64 = field
                    .parse()
                    .map_err(|_| load_err(*line, format!("column {c}: '{field}' is not a number")))?;
                if !x.is_finite() {
                    return Err(load_err(*line, format!("column {c}: non-finite value")));
                }
                coords.push(x);
            }
        }
    }
    if coords.is_empty() {
        return Err(load_err(*first_line, "file contains a header but no data rows".into()));
    }
    Ok(LabeledDataset {
        name: name.to_string(),
        dataset: Dataset::from_flat(dim, coords)?,
        labels: label_idx.map(|_| labels),
        label_names,
    })
}

/// `k` distinct data points drawn uniformly without replacement.
pub fn init_centers(data: &Dataset, k: usize, seed: u64) -> Result<CenterConfig> {
    let m = data.len();
    if k == 0 || k > m {
        return Err(Error::param(format!("need 1 <= k <= m, got k={k}, m={m}")));
    }
    let mut rng = seeded_rng(seed);
    let picks = rand::seq::index::sample(&mut rng, m, k);
    let mut coords = Vec::with_capacity(k * data.dim());
    for i in picks.iter() {
        coords.extend_from_slice(data.point(i));
    }
    CenterConfig::from_flat(data.dim(), coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, label: Option<&LabelColumn>) -> Result<LabeledDataset> {
        read_csv(Cursor::new(text), Path::new("test.csv"), "test", label)
    }

    #[test]
    fn default_synthetic_shape() {
        let d = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(d.dataset.len(), 300);
        assert_eq!(d.dataset.dim(), 2);
        let labels = d.labels.as_ref().unwrap();
        for c in 0..6 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 50);
        }
        assert_eq!(d, generate_synthetic(&SyntheticSpec::default()).unwrap());
        let other = generate_synthetic(&SyntheticSpec { seed: 7, ..Default::default() }).unwrap();
        assert_ne!(d.dataset, other.dataset);
    }

    #[test]
    fn noiseless_points_sit_on_means() {
        let spec = SyntheticSpec { noise_std: 0.0, ..Default::default() };
        let d = generate_synthetic(&spec).unwrap();
        let means = spec.means();
        for (p, &l) in d.dataset.points().zip(d.labels.as_ref().unwrap()) {
            assert_eq!(p, means[l].as_slice());
        }
    }

    #[test]
    fn empirical_means_match_layout() {
        let spec = SyntheticSpec { points_per_cluster: 5000, ..Default::default() };
        let d = generate_synthetic(&spec).unwrap();
        let labels = d.labels.unwrap();
        for (c, mean) in spec.means().iter().enumerate() {
            let mut sum = [0.0; 2];
            for (p, _) in d.dataset.points().zip(&labels).filter(|(_, &l)| l == c) {
                sum[0] += p[0];
                sum[1] += p[1];
            }
            for j in 0..2 {
                assert!((sum[j] / 5000.0 - mean[j]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn csv_header_without_labels() {
        let d = parse("a,b\n1,2\n3,4\n", None).unwrap();
        assert_eq!(d.dataset.len(), 2);
        assert_eq!(d.dataset.dim(), 2);
        assert!(d.labels.is_none());
    }

    #[test]
    fn csv_string_labels_in_first_appearance_order() {
        let text = "1,2,cat\n3,4,dog\n5,6,cat\n7,8,bird\n";
        let d = parse(text, Some(&LabelColumn::Index(2))).unwrap();
        assert_eq!(d.labels.unwrap(), vec![0, 1, 0, 2]);
        assert_eq!(d.label_names, vec!["cat", "dog", "bird"]);
        assert_eq!(d.dataset.dim(), 2);

        let text = "x,species,y\n1,b,2\n3,a,4\n";
        let d = parse(text, Some(&LabelColumn::Name("species".into()))).unwrap();
        assert_eq!(d.labels.unwrap(), vec![0, 1]);
        assert_eq!(d.dataset.point(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = parse("1,2\n3,4\n5\n", None).unwrap_err();
        assert!(matches!(err, Error::Load { line: 3, .. }), "{err}");
        let err = parse("1,2\n3,x\n", None).unwrap_err();
        assert!(matches!(err, Error::Load { line: 2, .. }), "{err}");
        assert!(parse("", None).is_err());
        assert!(parse("a,b\n", None).is_err());
        assert!(parse("1,2\n", Some(&LabelColumn::Index(5))).is_err());
        assert!(parse("a,b\n1,2\n", Some(&LabelColumn::Name("c".into()))).is_err());
        assert!(matches!(load_csv(Path::new("/no/such/file.csv"), None), Err(Error::Io { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let d = generate_synthetic(&SyntheticSpec { points_per_cluster: 3, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        d.write_csv_to(&mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap(), Some(&LabelColumn::Name("label".into()))).unwrap();
        assert_eq!(back.dataset, d.dataset);
        assert_eq!(back.labels, d.labels);
    }

    #[test]
    fn init_centers_examples() {
        let d = Dataset::new(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let c = init_centers(&d, 4, 11).unwrap();
        let mut got: Vec<f64> = c.as_flat().to_vec();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(init_centers(&d, 2, 5).unwrap(), init_centers(&d, 2, 5).unwrap());
        assert!(init_centers(&d, 5, 0).is_err());
        assert!(init_centers(&d, 0, 0).is_err());

        let one = Dataset::new(vec![vec![4.0, 2.0]]).unwrap();
        assert_eq!(init_centers(&one, 1, 99).unwrap().to_blocks(), vec![vec![4.0, 2.0]]);
    }

    #[test]
    fn zscore_standardizes() {
        let mut d = parse("1,5\n2,5\n3,5\n", None).unwrap();
        d.zscore();
        let col: Vec<f64> = d.dataset.points().map(|p| p[0]).collect();
        assert!(col.iter().sum::<f64>().abs() < 1e-12);
        assert!((col.iter().map(|x| x * x).sum::<f64>() / 3.0 - 1.0).abs() < 1e-12);
        assert!(d.dataset.points().all(|p| p[1] == 0.0));
    }
}
