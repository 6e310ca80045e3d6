//! Dataset ingestion (label-column CSV, MNIST IDX), deterministic splitting,
//! normalization, and minibatch streaming.
//!
//! IDX files are big-endian: images carry magic 2051 then count/rows/cols and
//! raw bytes; labels carry magic 2049 then count and bytes. Paths ending in
//! `.gz` are transparently gunzipped. Pixels are scaled to [0,1] by division
//! by 255; CSV features are z-scored per column. Both normalizations are
//! recorded in `normalization_tag` and re-normalizing a tagged dataset is an
//! error.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::nn::Batch;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub normalization_tag: Option<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Materializes the selected rows as an owned batch.
    pub fn batch_of(&self, rows: &[usize]) -> Batch {
        Batch::new(
            self.features.select_rows(rows),
            rows.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    /// Stacks two datasets with identical feature width and normalization.
    pub fn concat(self, other: Dataset) -> Result<Dataset> {
        if self.feature_dim() != other.feature_dim() {
            return Err(Error::DimensionMismatch {
                context: "dataset concat".into(),
                expected: self.feature_dim(),
                actual: other.feature_dim(),
            });
        }
        if self.normalization_tag != other.normalization_tag {
            return Err(Error::InvalidArgument(
                "cannot concat datasets with different normalization tags".into(),
            ));
        }
        let mut data = self.features.data().to_vec();
        data.extend_from_slice(other.features.data());
        let rows = self.len() + other.len();
        let mut labels = self.labels;
        labels.extend(other.labels);
        Ok(Dataset {
            name: self.name,
            features: Matrix::from_vec(rows, self.features.cols(), data),
            labels,
            n_classes: self.n_classes.max(other.n_classes),
            normalization_tag: self.normalization_tag,
        })
    }

    /// Z-scores every feature column in place (population moments over the
    /// full set). Errors if the dataset is already normalized.
    pub fn zscore_normalize(&mut self) -> Result<()> {
        if let Some(tag) = &self.normalization_tag {
            return Err(Error::InvalidArgument(format!(
                "dataset already normalized ({tag}); refusing to normalize twice"
            )));
        }
        let (n, d) = (self.features.rows(), self.features.cols());
        for j in 0..d {
            let mut mean = 0.0;
            for i in 0..n {
                mean += self.features.get(i, j);
            }
            mean /= n as f64;
            let mut var = 0.0;
            for i in 0..n {
                let c = self.features.get(i, j) - mean;
                var += c * c;
            }
            var /= n as f64;
            let std = var.sqrt();
            let denom = if std > 0.0 { std } else { 1.0 };
            for i in 0..n {
                let v = (self.features.get(i, j) - mean) / denom;
                self.features.set(i, j, v);
            }
        }
        self.normalization_tag = Some("zscore".into());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train_fraction must lie in (0,1), got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
        })
    }
}

/// Seeded uniform shuffle then prefix split; train gets `floor(N*fraction)`
/// rows, test the remainder. Disjoint, union = original.
pub fn split(ds: &Dataset, spec: SplitSpec) -> (Dataset, Dataset) {
    let n = ds.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    perm.shuffle(&mut rng);
    let n_train = (n as f64 * spec.train_fraction).floor() as usize;
    let take = |idx: &[usize], suffix: &str| -> Dataset {
        Dataset {
            name: format!("{}-{suffix}", ds.name),
            features: ds.features.select_rows(idx),
            labels: idx.iter().map(|&i| ds.labels[i]).collect(),
            n_classes: ds.n_classes,
            normalization_tag: ds.normalization_tag.clone(),
        }
    };
    (take(&perm[..n_train], "train"), take(&perm[n_train..], "test"))
}

fn parse_field(path: &str, line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::DataFormat {
        path: path.into(),
        line,
        msg: format!("cannot parse '{}' as a number", s.trim()),
    })
}

/// Loads a comma-separated file with numeric feature columns and a trailing
/// label column. An optional header (non-numeric first field) is skipped.
/// Labels are mapped to class ids by first appearance; features are z-scored
/// per column over the full set.
pub fn load_iris(path: impl AsRef<Path>) -> Result<Dataset> {
    let path_str = path.as_ref().display().to_string();
    let content =
        std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width: Option<usize> = None;

    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        // header auto-detection: a non-numeric first field on the first row
        if rows.is_empty() && label_names.is_empty() && fields[0].trim().parse::<f64>().is_err()
        {
            continue;
        }
        if fields.len() < 2 {
            return Err(Error::DataFormat {
                path: path_str.clone(),
                line: line_no,
                msg: "expected at least one feature column and a label".into(),
            });
        }
        let expect = *width.get_or_insert(fields.len());
        if fields.len() != expect {
            return Err(Error::DataFormat {
                path: path_str.clone(),
                line: line_no,
                msg: format!("expected {expect} columns, found {}", fields.len()),
            });
        }
        let feats: Vec<f64> = fields[..fields.len() - 1]
            .iter()
            .map(|f| parse_field(&path_str, line_no, f))
            .collect::<Result<_>>()?;
        let label = fields[fields.len() - 1].trim().to_string();
        let id = match label_names.iter().position(|l| *l == label) {
            Some(id) => id,
            None => {
                label_names.push(label);
                label_names.len() - 1
            }
        };
        rows.push(feats);
        labels.push(id);
    }

    if rows.is_empty() {
        return Err(Error::DataFormat {
            path: path_str,
            line: 0,
            msg: "no data rows".into(),
        });
    }

    let mut ds = Dataset {
        name: "iris".into(),
        features: Matrix::from_rows(&rows),
        labels,
        n_classes: label_names.len(),
        normalization_tag: None,
    };
    ds.zscore_normalize()?;
    Ok(ds)
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let path_str = path.display().to_string();
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(&path_str, e))?;
    if path_str.ends_with(".gz") {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(&path_str, e))?;
        return Ok(out);
    }
    Ok(raw)
}

fn be_u32(bytes: &[u8], off: usize, path: &str) -> Result<u32> {
    bytes
        .get(off..off + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::DataFormat {
            path: path.into(),
            line: 0,
            msg: "truncated header".into(),
        })
}

/// Loads an IDX image/label file pair. Pixels are scaled to [0,1].
pub fn load_mnist(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let img_path = images_path.as_ref().display().to_string();
    let bytes = read_all(images_path.as_ref())?;
    let magic = be_u32(&bytes, 0, &img_path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::DataFormat {
            path: img_path,
            line: 0,
            msg: format!("bad magic: expected {IDX_IMAGES_MAGIC:#010x}, found {magic:#010x}"),
        });
    }
    let n = be_u32(&bytes, 4, &img_path)? as usize;
    let rows = be_u32(&bytes, 8, &img_path)? as usize;
    let cols = be_u32(&bytes, 12, &img_path)? as usize;
    let pixels = n * rows * cols;
    let payload = bytes.get(16..16 + pixels).ok_or_else(|| Error::DataFormat {
        path: img_path.clone(),
        line: 0,
        msg: format!(
            "truncated payload: need {pixels} bytes, found {}",
            bytes.len().saturating_sub(16)
        ),
    })?;
    let features: Vec<f64> = payload.iter().map(|&b| b as f64 / 255.0).collect();

    let lbl_path = labels_path.as_ref().display().to_string();
    let lbytes = read_all(labels_path.as_ref())?;
    let lmagic = be_u32(&lbytes, 0, &lbl_path)?;
    if lmagic != IDX_LABELS_MAGIC {
        return Err(Error::DataFormat {
            path: lbl_path,
            line: 0,
            msg: format!("bad magic: expected {IDX_LABELS_MAGIC:#010x}, found {lmagic:#010x}"),
        });
    }
    let ln = be_u32(&lbytes, 4, &lbl_path)? as usize;
    if ln != n {
        return Err(Error::DataFormat {
            path: lbl_path,
            line: 0,
            msg: format!("label count {ln} does not match image count {n}"),
        });
    }
    let labels: Vec<usize> = lbytes
        .get(8..8 + ln)
        .ok_or_else(|| Error::DataFormat {
            path: lbl_path.clone(),
            line: 0,
            msg: "truncated label payload".into(),
        })?
        .iter()
        .map(|&b| b as usize)
        .collect();

    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    Ok(Dataset {
        name: "mnist".into(),
        features: Matrix::from_vec(n, rows * cols, features),
        labels,
        n_classes,
        normalization_tag: Some("unit_range".into()),
    })
}

fn writer_for(path: &Path) -> Result<Box<dyn Write>> {
    let path_str = path.display().to_string();
    let f = File::create(path).map_err(|e| Error::io(&path_str, e))?;
    if path_str.ends_with(".gz") {
        Ok(Box::new(GzEncoder::new(
            BufWriter::new(f),
            flate2::Compression::fast(),
        )))
    } else {
        Ok(Box::new(BufWriter::new(f)))
    }
}

/// Writes images in IDX format (gzipped when the path ends in `.gz`); the
/// counterpart of [`load_mnist`] for fixtures and synthetic data.
pub fn write_idx_images(
    path: impl AsRef<Path>,
    images: &[Vec<u8>],
    rows: u32,
    cols: u32,
) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut w = writer_for(path.as_ref())?;
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        w.write_all(&IDX_IMAGES_MAGIC.to_be_bytes())?;
        w.write_all(&(images.len() as u32).to_be_bytes())?;
        w.write_all(&rows.to_be_bytes())?;
        w.write_all(&cols.to_be_bytes())?;
        for img in images {
            assert_eq!(img.len(), (rows * cols) as usize, "image size mismatch");
            w.write_all(img)?;
        }
        w.flush()
    };
    emit(&mut w).map_err(|e| Error::io(&path_str, e))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut w = writer_for(path.as_ref())?;
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        w.write_all(&IDX_LABELS_MAGIC.to_be_bytes())?;
        w.write_all(&(labels.len() as u32).to_be_bytes())?;
        w.write_all(labels)?;
        w.flush()
    };
    emit(&mut w).map_err(|e| Error::io(&path_str, e))
}

/// Per-epoch seeded permutation of `0..n` cut into batches; the final short
/// batch is kept. The permutation seed is `seed ^ epoch`.
pub fn epoch_row_batches(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1 && batch_size <= n, "invalid batch size");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ epoch);
    perm.shuffle(&mut rng);
    perm.chunks(batch_size).map(|c| c.to_vec()).collect()
}

/// Ordered minibatch sequence for one epoch.
pub fn batch_stream(ds: &Dataset, batch_size: usize, seed: u64, epoch: u64) -> Vec<Batch> {
    epoch_row_batches(ds.len(), batch_size, seed, epoch)
        .iter()
        .map(|rows| ds.batch_of(rows))
        .collect()
}

/// Endless row-index stream crossing epoch boundaries; each epoch reshuffles
/// with `seed ^ epoch`.
pub struct MinibatchCursor {
    n: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
    queue: std::collections::VecDeque<Vec<usize>>,
}

impl MinibatchCursor {
    pub fn new(n: usize, batch_size: usize, seed: u64) -> Self {
        Self {
            n,
            batch_size,
            seed,
            epoch: 0,
            queue: Default::default(),
        }
    }

    pub fn next_rows(&mut self) -> Vec<usize> {
        if self.queue.is_empty() {
            self.queue
                .extend(epoch_row_batches(self.n, self.batch_size, self.seed, self.epoch));
            self.epoch += 1;
        }
        self.queue.pop_front().expect("refilled queue")
    }
}

/// Synthetic image classification data shaped like MNIST: each class has a
/// seeded prototype pattern; samples add pixel noise around it. Returns raw
/// byte images and labels ready for [`write_idx_images`].
pub fn synthetic_image_classes(
    n: usize,
    side: u32,
    n_classes: usize,
    noise: f64,
    seed: u64,
) -> (Vec<Vec<u8>>, Vec<u8>) {
    assert!(n_classes >= 2 && n_classes <= 256);
    let d = (side * side) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // smooth-ish prototypes: sparse bright blobs on a dark background
    let prototypes: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        rng.gen_range(0.45..1.0)
                    } else {
                        rng.gen_range(0.0..0.12)
                    }
                })
                .collect()
        })
        .collect();
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % n_classes;
        let img: Vec<u8> = prototypes[class]
            .iter()
            .map(|&p| {
                let v = (p + noise * (rng.gen::<f64>() - 0.5) * 2.0).clamp(0.0, 1.0);
                (v * 255.0).round() as u8
            })
            .collect();
        images.push(img);
        labels.push(class as u8);
    }
    (images, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iris_path() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv")
    }

    #[test]
    fn loads_canonical_iris() {
        let ds = load_iris(iris_path()).unwrap();
        assert_eq!(ds.len(), 150);
        assert_eq!(ds.feature_dim(), 4);
        assert_eq!(ds.n_classes, 3);
        let mut seen = ds.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn iris_normalization_moments() {
        let ds = load_iris(iris_path()).unwrap();
        let (n, d) = (ds.len(), ds.feature_dim());
        for j in 0..d {
            let mean: f64 = (0..n).map(|i| ds.features.get(i, j)).sum::<f64>() / n as f64;
            let var: f64 =
                (0..n).map(|i| (ds.features.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(mean.abs() <= 1e-10, "column {j} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() <= 1e-10, "column {j} std {}", var.sqrt());
        }
        assert_eq!(ds.normalization_tag.as_deref(), Some("zscore"));
    }

    #[test]
    fn empty_and_malformed_csv_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(load_iris(&empty).is_err());

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "1.0,2.0,3.0,4.0,a\n1.0,2.0,oops,4.0,a\n").unwrap();
        let err = load_iris(&bad).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");

        let ragged = dir.path().join("ragged.csv");
        std::fs::write(&ragged, "1.0,2.0,a\n1.0,2.0,3.0,a\n").unwrap();
        let err = load_iris(&ragged).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn renormalizing_tagged_dataset_errors() {
        let mut ds = load_iris(iris_path()).unwrap();
        assert!(ds.zscore_normalize().is_err());
    }

    #[test]
    fn idx_round_trip_with_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img.idx");
        let lbl = dir.path().join("lbl.idx");
        // 2 fabricated 2x2 images with known bytes
        write_idx_images(&img, &[vec![17, 0, 255, 3], vec![0, 0, 0, 0]], 2, 2).unwrap();
        write_idx_labels(&lbl, &[7, 1]).unwrap();
        let ds = load_mnist(&img, &lbl).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_dim(), 4);
        assert_eq!(ds.features.row(0), &[17.0 / 255.0, 0.0, 1.0, 3.0 / 255.0]);
        assert_eq!(ds.features.row(1), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(ds.labels, vec![7, 1]);
        assert_eq!(ds.normalization_tag.as_deref(), Some("unit_range"));
    }

    #[test]
    fn idx_gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img.idx.gz");
        let lbl = dir.path().join("lbl.idx.gz");
        write_idx_images(&img, &[vec![9, 8, 7, 6]], 2, 2).unwrap();
        write_idx_labels(&lbl, &[2]).unwrap();
        let ds = load_mnist(&img, &lbl).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.features.row(0)[0], 9.0 / 255.0);
    }

    #[test]
    fn idx_magic_and_truncation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img.idx");
        let lbl = dir.path().join("lbl.idx");
        write_idx_labels(&lbl, &[0]).unwrap();
        // labels file offered as images: magic mismatch names both values
        let err = load_mnist(&lbl, &lbl).unwrap_err().to_string();
        assert!(err.contains("0x00000803") && err.contains("0x00000801"), "{err}");

        // truncated payload
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&[1, 2, 3]); // need 8 bytes
        std::fs::write(&img, &bytes).unwrap();
        let err = load_mnist(&img, &lbl).unwrap_err().to_string();
        assert!(err.contains("truncated"), "{err}");
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = load_iris(iris_path()).unwrap();
        let spec = SplitSpec::new(0.8, 5).unwrap();
        let (train, test) = split(&ds, spec);
        assert_eq!(train.len(), 120);
        assert_eq!(test.len(), 30);

        let (train2, _) = split(&ds, spec);
        assert_eq!(train.labels, train2.labels);
        assert_eq!(train.features.data(), train2.features.data());

        let (train3, _) = split(&ds, SplitSpec::new(0.8, 6).unwrap());
        assert_ne!(train.labels, train3.labels);
    }

    #[test]
    fn split_preserves_multiset() {
        let ds = load_iris(iris_path()).unwrap();
        let (train, test) = split(&ds, SplitSpec::new(0.8, 3).unwrap());
        let mut counts = vec![0usize; ds.n_classes];
        for &l in train.labels.iter().chain(test.labels.iter()) {
            counts[l] += 1;
        }
        let mut expect = vec![0usize; ds.n_classes];
        for &l in &ds.labels {
            expect[l] += 1;
        }
        assert_eq!(counts, expect);
    }

    #[test]
    fn batch_stream_shapes() {
        let (imgs, lbls) = synthetic_image_classes(10, 2, 2, 0.1, 0);
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("i.idx");
        let lbl = dir.path().join("l.idx");
        write_idx_images(&img, &imgs, 2, 2).unwrap();
        write_idx_labels(&lbl, &lbls).unwrap();
        let ds = load_mnist(&img, &lbl).unwrap();

        let batches = batch_stream(&ds, 3, 1, 0);
        let sizes: Vec<usize> = batches.iter().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);

        // every row exactly once per epoch
        let mut seen: Vec<usize> = epoch_row_batches(10, 3, 1, 0).concat();
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());

        // batch_size = n gives a single full batch
        let one = batch_stream(&ds, 10, 1, 0);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].len(), 10);
    }

    #[test]
    fn epochs_reshuffle_but_replay_identically() {
        let e0 = epoch_row_batches(32, 8, 9, 0);
        let e1 = epoch_row_batches(32, 8, 9, 1);
        assert_ne!(e0, e1, "epochs should reshuffle");
        assert_eq!(e0, epoch_row_batches(32, 8, 9, 0));
        assert_eq!(e1, epoch_row_batches(32, 8, 9, 1));
    }

    #[test]
    fn cursor_crosses_epochs() {
        let mut cur = MinibatchCursor::new(7, 3, 4);
        let mut rows = Vec::new();
        for _ in 0..6 {
            rows.extend(cur.next_rows());
        }
        // two full epochs of 7 rows
        assert_eq!(rows.len(), 14);
        let mut first: Vec<usize> = rows[..7].to_vec();
        first.sort_unstable();
        assert_eq!(first, (0..7).collect::<Vec<_>>());
    }
}
