//! Loading of delimited classification files (UCI layout) into normalized
//! feature matrices with one-hot targets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major features and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n_features: usize,
    n_classes: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
    class_names: Vec<String>,
    normalized: bool,
}

/// Summary of a dataset, embedded in run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    pub normalized: bool,
}

impl Dataset {
    /// Arbitrary real-valued targets; used for tests and regression-style
    /// checks. Classification data should go through [`Dataset::from_labels`].
    pub fn from_rows(name: &str, features: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset(name.to_owned()));
        }
        if features.len() != targets.len() {
            return Err(Error::shape(format!(
                "{} feature rows but {} target rows",
                features.len(),
                targets.len()
            )));
        }
        let n_features = features[0].len();
        let n_classes = targets[0].len();
        if features.iter().any(|r| r.len() != n_features) || targets.iter().any(|r| r.len() != n_classes) {
            return Err(Error::shape("ragged rows"));
        }
        Ok(Self {
            name: name.to_owned(),
            n_features,
            n_classes,
            features: features.into_iter().flatten().collect(),
            targets: targets.into_iter().flatten().collect(),
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            normalized: false,
        })
    }

    /// One-hot encodes `labels` (indices into `class_names`).
    pub fn from_labels(
        name: &str,
        features: Vec<Vec<f64>>,
        labels: &[usize],
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_classes = class_names.len();
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::shape(format!("label {bad} out of range for {n_classes} classes")));
        }
        let targets = labels
            .iter()
            .map(|&l| {
                let mut row = vec![0.0; n_classes];
                row[l] = 1.0;
                row
            })
            .collect();
        let mut data = Self::from_rows(name, features, targets)?;
        data.class_names = class_names;
        Ok(data)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.features.len() / self.n_features.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn features_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn target_row(&self, i: usize) -> &[f64] {
        &self.targets[i * self.n_classes..(i + 1) * self.n_classes]
    }

    /// Class index of row `i`: argmax of its target, lowest index on ties.
    pub fn label(&self, i: usize) -> usize {
        crate::metrics::argmax(self.target_row(i))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for i in 0..self.len() {
            counts[self.label(i)] += 1;
        }
        counts
    }

    pub fn info(&self) -> DatasetInfo {
        DatasetInfo {
            name: self.name.clone(),
            rows: self.len(),
            features: self.n_features,
            classes: self.n_classes,
            class_names: self.class_names.clone(),
            class_counts: self.class_counts(),
            normalized: self.normalized,
        }
    }

    /// Min-max scales every feature column to `[0, 1]`. Constant columns map to 0.
    pub fn normalize(&mut self) {
        let n = self.len();
        for c in 0..self.n_features {
            let col = (0..n).map(|r| self.features[r * self.n_features + c]);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let span = hi - lo;
            for r in 0..n {
                let v = &mut self.features[r * self.n_features + c];
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
        self.normalized = true;
    }

    /// Rows in the given order (indices may repeat or be a subset).
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut targets = Vec::with_capacity(rows.len() * self.n_classes);
        for &r in rows {
            features.extend_from_slice(self.features_row(r));
            targets.extend_from_slice(self.target_row(r));
        }
        Dataset {
            features,
            targets,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Dataset {
        Dataset {
            name: self.name.clone(),
            n_features: self.n_features,
            n_classes: self.n_classes,
            features: Vec::new(),
            targets: Vec::new(),
            class_names: self.class_names.clone(),
            normalized: self.normalized,
        }
    }

    /// Seeded row permutation; features and targets move together.
    pub fn shuffle(&self, seed: u64) -> Dataset {
        self.select(&permutation(self.len(), seed))
    }

    /// Shuffles, then holds out `test_fraction` of the rows (at least one
    /// row stays on each side).
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::config(format!("split fraction must be in (0,1), got {test_fraction}")));
        }
        if self.len() < 2 {
            return Err(Error::config("need at least two rows to split"));
        }
        let order = permutation(self.len(), seed);
        let n_test = ((self.len() as f64 * test_fraction).round() as usize).clamp(1, self.len() - 1);
        let (test, train) = order.split_at(n_test);
        Ok((self.select(train), self.select(test)))
    }
}

pub(crate) fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// A column position in the raw file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    First,
    Last,
    Index(usize),
}

impl Column {
    fn resolve(self, width: usize) -> Option<usize> {
        match self {
            Column::First => Some(0),
            Column::Last => width.checked_sub(1),
            Column::Index(i) if i < width => Some(i),
            Column::Index(_) => None,
        }
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Column::First),
            "last" => Ok(Column::Last),
            other => other
                .parse()
                .map(Column::Index)
                .map_err(|_| Error::config(format!("column must be first, last or an index, got {other:?}"))),
        }
    }
}

/// Layout of a delimited classification file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub class_column: Column,
    pub id_columns: Vec<Column>,
    pub delimiter: u8,
    pub header: bool,
    pub normalize: bool,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            class_column: Column::Last,
            id_columns: Vec::new(),
            delimiter: b',',
            header: false,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Iris,
    Wine,
    Glass,
    Soybean,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Iris, Builtin::Wine, Builtin::Glass, Builtin::Soybean];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Iris => "iris",
            Builtin::Wine => "wine",
            Builtin::Glass => "glass",
            Builtin::Soybean => "soybean",
        }
    }

    /// File name as distributed by the UCI repository.
    pub fn file_name(self) -> &'static str {
        match self {
            Builtin::Iris => "iris.data",
            Builtin::Wine => "wine.data",
            Builtin::Glass => "glass.data",
            Builtin::Soybean => "soybean-small.data",
        }
    }

    pub fn spec(self) -> DatasetSpec {
        let mut spec = DatasetSpec::default();
        match self {
            Builtin::Iris | Builtin::Soybean => {}
            Builtin::Wine => spec.class_column = Column::First,
            Builtin::Glass => spec.id_columns = vec![Column::First],
        }
        spec
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::config(format!("unknown dataset {s:?}; valid choices: iris, wine, glass, soybean")))
    }
}

/// Column layout for one of the four UCI files.
pub fn builtin_spec(name: &str) -> Result<DatasetSpec> {
    Ok(name.parse::<Builtin>()?.spec())
}

/// Loads a builtin dataset from `dir/<uci file name>`.
pub fn load_builtin(builtin: Builtin, dir: &Path, normalize: bool) -> Result<Dataset> {
    let spec = DatasetSpec {
        normalize,
        ..builtin.spec()
    };
    let mut data = load_csv(&dir.join(builtin.file_name()), &spec)?;
    data.name = builtin.name().to_owned();
    Ok(data)
}

pub fn load_csv(path: &Path, spec: &DatasetSpec) -> Result<Dataset> {
    let text = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned());
    let mut data = parse_delimited(&text, spec, &name).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_owned(),
            line,
            message,
        },
        other => other,
    })?;
    if spec.normalize {
        data.normalize();
    }
    Ok(data)
}

fn resolve_layout(spec: &DatasetSpec, width: usize) -> Result<(usize, usize, Vec<usize>)> {
    let class_idx = spec
        .class_column
        .resolve(width)
        .ok_or_else(|| Error::config(format!("class column {:?} out of range for width {width}", spec.class_column)))?;
    let dropped = spec
        .id_columns
        .iter()
        .map(|id| {
            id.resolve(width)
                .ok_or_else(|| Error::config(format!("id column {id:?} out of range for width {width}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if dropped.contains(&class_idx) {
        return Err(Error::config("class column is also listed as an id column"));
    }
    Ok((width, class_idx, dropped))
}

fn parse_delimited(bytes: &[u8], spec: &DatasetSpec, name: &str) -> Result<Dataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: name.into(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(spec.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut layout: Option<(usize, usize, Vec<usize>)> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if layout.is_none() {
            layout = Some(resolve_layout(spec, record.len())?);
        }
        let (w, class_idx, dropped) = layout.as_ref().unwrap();
        let (w, class_idx) = (*w, *class_idx);
        if record.len() != w {
            return Err(parse_err(line, format!("expected {w} fields, found {}", record.len())));
        }
        let mut row = Vec::with_capacity(w);
        for (c, field) in record.iter().enumerate() {
            if c == class_idx || dropped.contains(&c) {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("field {} is not numeric: {field:?}", c + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("field {} is not finite", c + 1)));
            }
            row.push(v);
        }
        if row.is_empty() {
            return Err(parse_err(line, "no feature columns left".into()));
        }
        let class = &record[class_idx];
        if class.is_empty() {
            return Err(parse_err(line, "missing class label".into()));
        }
        let label = match class_names.iter().position(|c| c == class) {
            Some(i) => i,
            None => {
                class_names.push(class.to_owned());
                class_names.len() - 1
            }
        };
        features.push(row);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset(name.to_owned()));
    }
    Dataset::from_labels(name, features, &labels, class_names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, spec: &DatasetSpec) -> Result<Dataset> {
        let mut d = parse_delimited(text.as_bytes(), spec, "mem")?;
        if spec.normalize {
            d.normalize();
        }
        Ok(d)
    }

    #[test]
    fn builtin_layouts() {
        let iris = builtin_spec("iris").unwrap();
        assert_eq!(iris.class_column, Column::Last);
        assert!(iris.id_columns.is_empty());
        assert_eq!(builtin_spec("glass").unwrap().id_columns, vec![Column::First]);
        assert_eq!(builtin_spec("wine").unwrap().class_column, Column::First);
        assert_eq!(builtin_spec("soybean").unwrap().class_column, Column::Last);
        let err = builtin_spec("nosuch").unwrap_err().to_string();
        assert!(err.contains("iris, wine, glass, soybean"), "{err}");
    }

    #[test]
    fn parses_and_encodes_in_first_appearance_order() {
        let d = parse("1,2,b\n3,4,a\n5,4,b\n\n", &DatasetSpec::default()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.class_names(), ["b", "a"]);
        assert_eq!(d.target_row(1), [0.0, 1.0]);
        assert_eq!(d.features_row(0), [0.0, 0.0]);
        assert_eq!(d.features_row(2), [1.0, 1.0]);
        assert_eq!(d.class_counts(), vec![2, 1]);
    }

    #[test]
    fn drops_id_and_reads_first_class_column() {
        let spec = DatasetSpec {
            class_column: Column::First,
            id_columns: vec![Column::Last],
            normalize: false,
            ..DatasetSpec::default()
        };
        let d = parse("x,1.5,2.5,10\ny,0.5,1.0,11\n", &spec).unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.features_row(1), [0.5, 1.0]);
        assert_eq!(d.class_names(), ["x", "y"]);
    }

    #[test]
    fn constant_column_normalizes_to_zero() {
        let d = parse("7,1,a\n7,2,b\n", &DatasetSpec::default()).unwrap();
        assert_eq!(d.features_row(0)[0], 0.0);
        assert_eq!(d.features_row(1)[0], 0.0);
    }

    #[test]
    fn header_is_skipped_when_requested() {
        let spec = DatasetSpec {
            header: true,
            delimiter: b';',
            ..DatasetSpec::default()
        };
        let d = parse("f1;f2;class\n1;2;a\n2;3;b\n", &spec).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let spec = DatasetSpec::default();
        match parse("1,2,a\n1,?,b\n", &spec) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("1,2,a\n1,2,3,b\n", &spec) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("", &spec), Err(Error::EmptyDataset(_))));
        assert!(matches!(parse("\n\n", &spec), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv(Path::new("/nonexistent/x.data"), &DatasetSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/x.data"));
    }

    #[test]
    fn shuffle_is_a_seeded_permutation() {
        let feats: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let d = Dataset::from_labels("s", feats, &labels, vec!["a".into(), "b".into()]).unwrap();
        let s1 = d.shuffle(42);
        assert_eq!(s1, d.shuffle(42));
        assert_ne!(s1, d);
        let mut rows: Vec<(f64, usize)> = (0..s1.len()).map(|i| (s1.features_row(i)[0], s1.label(i))).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, (f, l)) in rows.into_iter().enumerate() {
            assert_eq!(f, i as f64);
            assert_eq!(l, i % 2);
        }

        let one = Dataset::from_labels("one", vec![vec![3.0]], &[0], vec!["a".into()]).unwrap();
        assert_eq!(one.shuffle(9), one);
    }

    #[test]
    fn split_partitions_rows() {
        let feats: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_labels("s", feats, &[0; 10], vec!["a".into()]).unwrap();
        let (train, test) = d.split(0.3, 1).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        let mut all: Vec<f64> = (0..7)
            .map(|i| train.features_row(i)[0])
            .chain((0..3).map(|i| test.features_row(i)[0]))
            .collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
        assert!(d.split(1.0, 1).is_err());
    }
}
