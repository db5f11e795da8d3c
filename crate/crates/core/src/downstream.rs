//! Classifiers on top of embeddings, top-k decoding, and the evaluation
//! metrics (test error, precision at 1).

use log::warn;
use serde::{Deserialize, Serialize};

use crate::embed::{embedding_regressor, Dataset, Embedding};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{ridge_lstsq, SolverConfig};
use crate::matrix::{dot, spmm, DenseMatrix, SeededRng, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Scores `(x^T Z) V^T`.
    InnerProduct,
    /// One logistic head per label on the representation `x^T Z`.
    IndependentLogistic,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::InnerProduct => "inner-product",
            ModelKind::IndependentLogistic => "independent-logistic",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner-product" => Ok(ModelKind::InnerProduct),
            "independent-logistic" => Ok(ModelKind::IndependentLogistic),
            other => Err(Error::Validation(format!("unknown model kind {other:?}"))),
        }
    }
}

/// A decodable model: regression map `Z` (d x k), label map `V` (c x k) and,
/// for the logistic kind, per-label heads (c x (k+1), bias last).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    kind: ModelKind,
    z: DenseMatrix,
    v: DenseMatrix,
    heads: Option<DenseMatrix>,
}

impl TrainedModel {
    pub fn new(kind: ModelKind, z: DenseMatrix, v: DenseMatrix, heads: Option<DenseMatrix>) -> Result<Self> {
        if z.cols() != v.cols() {
            return dim_err(format!(
                "Z has {} columns but V has {}",
                z.cols(),
                v.cols()
            ));
        }
        if z.cols() == 0 {
            return Err(Error::Validation("model dimension k must be at least 1".into()));
        }
        match (kind, &heads) {
            (ModelKind::InnerProduct, Some(_)) => {
                return Err(Error::Validation("inner-product model cannot carry heads".into()))
            }
            (ModelKind::IndependentLogistic, None) => {
                return Err(Error::Validation("logistic model needs heads".into()))
            }
            (ModelKind::IndependentLogistic, Some(h)) => {
                if h.rows() != v.rows() || h.cols() != z.cols() + 1 {
                    return dim_err(format!(
                        "heads are {:?}, expected ({}, {})",
                        h.shape(),
                        v.rows(),
                        z.cols() + 1
                    ));
                }
            }
            _ => {}
        }
        Ok(Self { kind, z, v, heads })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn z(&self) -> &DenseMatrix {
        &self.z
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn heads(&self) -> Option<&DenseMatrix> {
        self.heads.as_ref()
    }

    pub fn d(&self) -> usize {
        self.z.rows()
    }

    pub fn c(&self) -> usize {
        self.v.rows()
    }

    pub fn k(&self) -> usize {
        self.z.cols()
    }

    /// Predicted embeddings `X Z` (n x k).
    pub fn represent(&self, x: &SparseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.d() {
            return dim_err(format!(
                "inputs have {} features, model expects {}",
                x.cols(),
                self.d()
            ));
        }
        spmm(x, &self.z)
    }

    fn score_into(&self, r: &[f64], scores: &mut [f64]) {
        let k = self.k();
        match (&self.kind, &self.heads) {
            (ModelKind::IndependentLogistic, Some(h)) => {
                for (j, s) in scores.iter_mut().enumerate() {
                    let mut z = h.get(j, k);
                    for l in 0..k {
                        z += h.get(j, l) * r[l];
                    }
                    *s = sigmoid(z);
                }
            }
            _ => {
                scores.iter_mut().for_each(|s| *s = 0.0);
                for (l, &rl) in r.iter().enumerate() {
                    for (s, &vl) in scores.iter_mut().zip(self.v.col(l)) {
                        *s += rl * vl;
                    }
                }
            }
        }
    }
}

/// Inner-product decoder on an embedding: `Z` regresses `Y V` on `X`.
pub fn train_inner_product(data: &Dataset, emb: &Embedding, solver: &SolverConfig) -> Result<TrainedModel> {
    if emb.k() == 0 {
        return Err(Error::Validation("embedding dimension k must be at least 1".into()));
    }
    let z = embedding_regressor(data, emb, solver)?;
    TrainedModel::new(ModelKind::InnerProduct, z, emb.v().clone(), None)
}

/// Decoder on the unsupervised feature embedding `W` (d x k): the labels are
/// regressed on the representation `X W`, giving `V = B^T` for the fitted
/// `k x c` map `B`.
pub fn train_pca_decoder(data: &Dataset, w: &DenseMatrix, solver: &SolverConfig) -> Result<TrainedModel> {
    if w.rows() != data.d() {
        return dim_err(format!(
            "feature embedding has {} rows, dataset has {} features",
            w.rows(),
            data.d()
        ));
    }
    let repr = SparseMatrix::from_dense(&spmm(data.x(), w)?);
    let b = ridge_lstsq(&repr, &data.y().to_dense(), solver)?;
    TrainedModel::new(ModelKind::InnerProduct, w.clone(), b.transpose(), None)
}

/// Plain SGD settings for the logistic heads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            lr: 0.1,
            seed: 0,
        }
    }
}

/// Logistic model plus the mean training log-loss after each epoch.
#[derive(Clone, Debug)]
pub struct LogisticFit {
    pub model: TrainedModel,
    pub epoch_loss: Vec<f64>,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(z)` if positive else `-log(1 - σ(z))`, computed stably.
#[inline]
fn log_loss(z: f64, positive: bool) -> f64 {
    let m = if positive { -z } else { z };
    // log(1 + e^m)
    if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    }
}

/// Independent per-label logistic regressions on `repr` (n x k), keeping the
/// `Z` and `V` of `base` so the model can decode raw features.
pub fn train_independent_logistic(
    base: &TrainedModel,
    repr: &DenseMatrix,
    labels: &SparseMatrix,
    cfg: &LogisticConfig,
) -> Result<TrainedModel> {
    train_independent_logistic_traced(base, repr, labels, cfg).map(|f| f.model)
}

/// As [`train_independent_logistic`], also returning the per-epoch loss.
///
/// Every head starts at zero and sees the examples in the same seeded order
/// each epoch (one Fisher–Yates shuffle per epoch). Labels with no positive
/// example get a bias-only head at the smoothed base rate `1 / (n + 2)`.
pub fn train_independent_logistic_traced(
    base: &TrainedModel,
    repr: &DenseMatrix,
    labels: &SparseMatrix,
    cfg: &LogisticConfig,
) -> Result<LogisticFit> {
    let (n, k) = repr.shape();
    let c = labels.cols();
    if k == 0 {
        return Err(Error::Validation("representation has no columns".into()));
    }
    if labels.rows() != n {
        return dim_err(format!(
            "representation has {n} rows but labels have {}",
            labels.rows()
        ));
    }
    if k != base.k() || c != base.c() {
        return dim_err(format!(
            "representation/labels are {k}-dim over {c} labels, base model is {}-dim over {}",
            base.k(),
            base.c()
        ));
    }
    if labels.nnz() == 0 {
        return Err(Error::Validation("no label has any positive example".into()));
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::Validation("learning rate must be positive".into()));
    }

    let mut positives: Vec<Vec<usize>> = vec![Vec::new(); c];
    for i in 0..n {
        for &j in labels.row(i).0 {
            positives[j].push(i);
        }
    }
    let mut rng = SeededRng::new(cfg.seed);
    let orders: Vec<Vec<usize>> = (0..cfg.epochs)
        .map(|_| {
            let mut o: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut o);
            o
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| repr.row(i)).collect();

    let mut heads = DenseMatrix::zeros(c, k + 1);
    let mut epoch_loss = vec![0.0; cfg.epochs];
    let mut is_pos = vec![false; n];
    let base_rate = 1.0 / (n as f64 + 2.0);
    for j in 0..c {
        let mut w = vec![0.0; k];
        let mut b = 0.0;
        if positives[j].is_empty() {
            b = (base_rate / (1.0 - base_rate)).ln();
            let loss: f64 = (0..n).map(|_| log_loss(b, false)).sum();
            epoch_loss.iter_mut().for_each(|l| *l += loss);
        } else {
            positives[j].iter().for_each(|&i| is_pos[i] = true);
            for (e, order) in orders.iter().enumerate() {
                for &i in order {
                    let r = &rows[i];
                    let p = sigmoid(dot(&w, r) + b);
                    let g = p - if is_pos[i] { 1.0 } else { 0.0 };
                    for (wl, rl) in w.iter_mut().zip(r) {
                        *wl -= cfg.lr * g * rl;
                    }
                    b -= cfg.lr * g;
                }
                epoch_loss[e] += (0..n)
                    .map(|i| log_loss(dot(&w, &rows[i]) + b, is_pos[i]))
                    .sum::<f64>();
            }
            positives[j].iter().for_each(|&i| is_pos[i] = false);
        }
        for (l, wl) in w.iter().enumerate() {
            heads.set(j, l, *wl);
        }
        heads.set(j, k, b);
    }
    let denom = (n * c).max(1) as f64;
    epoch_loss.iter_mut().for_each(|l| *l /= denom);
    let model = TrainedModel::new(
        ModelKind::IndependentLogistic,
        base.z().clone(),
        base.v().clone(),
        Some(heads.checked()?),
    )?;
    Ok(LogisticFit { model, epoch_loss })
}

/// Top-`topk` labels per example, best first; equal scores are ordered by
/// ascending label index.
pub fn predict_topk(model: &TrainedModel, x: &SparseMatrix, topk: usize) -> Result<Vec<Vec<usize>>> {
    if topk == 0 {
        return Err(Error::Validation("topk must be at least 1".into()));
    }
    let repr = model.represent(x)?;
    let c = model.c();
    let take = topk.min(c);
    let mut scores = vec![0.0; c];
    let mut idx: Vec<usize> = Vec::with_capacity(c);
    let mut out = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        model.score_into(&repr.row(i), &mut scores);
        out.push(rank_top(&scores, take, &mut idx));
    }
    Ok(out)
}

/// Indices of the `take` best scores under (score desc, index asc).
pub fn rank_top(scores: &[f64], take: usize, idx: &mut Vec<usize>) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    idx.clear();
    idx.extend(0..scores.len());
    let take = take.min(scores.len());
    if take == 0 {
        return Vec::new();
    }
    if take < idx.len() {
        idx.select_nth_unstable_by(take - 1, cmp);
        idx.truncate(take);
    }
    idx.sort_unstable_by(cmp);
    idx.clone()
}

/// Metrics over the examples that have at least one true label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Fraction whose top-1 prediction is not a true label.
    pub test_error: f64,
    /// Fraction whose top-1 prediction is a true label.
    pub precision_at_1: f64,
    pub n_eval: usize,
    /// Examples skipped because their truth row was empty.
    pub n_excluded: usize,
}

pub fn evaluate(predictions: &[Vec<usize>], truth: &SparseMatrix) -> Result<EvalReport> {
    if predictions.len() != truth.rows() {
        return dim_err(format!(
            "{} predictions for {} examples",
            predictions.len(),
            truth.rows()
        ));
    }
    let mut hits = 0usize;
    let mut n_eval = 0usize;
    let mut n_excluded = 0usize;
    for (i, pred) in predictions.iter().enumerate() {
        let (labels, _) = truth.row(i);
        if labels.is_empty() {
            n_excluded += 1;
            continue;
        }
        n_eval += 1;
        if let Some(top) = pred.first() {
            if labels.binary_search(top).is_ok() {
                hits += 1;
            }
        }
    }
    if n_excluded > 0 {
        warn!("{n_excluded} example(s) without true labels excluded from evaluation");
    }
    if n_eval == 0 {
        return Err(Error::Validation("no labeled examples to evaluate".into()));
    }
    Ok(EvalReport {
        test_error: (n_eval - hits) as f64 / n_eval as f64,
        precision_at_1: hits as f64 / n_eval as f64,
        n_eval,
        n_excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{cs_embed, rembrandt_embed, EmbedConfig};
    use crate::linalg::Ridge;
    use crate::synth::{make_synthetic, make_synthetic_with_truth, SynthSpec};

    fn one_hot(labels: &[usize], c: usize) -> SparseMatrix {
        let rows: Vec<Vec<(usize, f64)>> = labels.iter().map(|&l| vec![(l, 1.0)]).collect();
        SparseMatrix::from_rows(c, &rows).unwrap()
    }

    #[test]
    fn tie_break_by_label_index() {
        let mut idx = Vec::new();
        assert_eq!(rank_top(&[0.1, 0.9, 0.9], 2, &mut idx), vec![1, 2]);
        assert_eq!(rank_top(&[0.5, 0.5, 0.5, 0.7], 3, &mut idx), vec![3, 0, 1]);
    }

    #[test]
    fn identity_everything_reproduces_labels() {
        let labels = [2, 0, 1, 2];
        let y = one_hot(&labels, 3);
        let data = Dataset::new(SparseMatrix::identity(4), y.clone()).unwrap();
        let emb = Embedding::new(DenseMatrix::identity(3), vec![1.0; 3]).unwrap();
        let model = train_inner_product(&data, &emb, &SolverConfig::default().with_ridge(Ridge::none())).unwrap();
        assert!(model.z().max_abs_diff(&y.to_dense()) < 1e-10);
        let pred = predict_topk(&model, data.x(), 1).unwrap();
        assert_eq!(pred.iter().map(|p| p[0]).collect::<Vec<_>>(), labels);
    }

    #[test]
    fn predictions_are_distinct_and_truncated() {
        let mut rng = SeededRng::new(1);
        let z = crate::matrix::randn(4, 2, &mut rng).unwrap();
        let v = crate::matrix::randn(5, 2, &mut rng).unwrap();
        let model = TrainedModel::new(ModelKind::InnerProduct, z, v, None).unwrap();
        let x = SparseMatrix::from_dense(&crate::matrix::randn(6, 4, &mut rng).unwrap());
        for topk in [1, 3, 5, 9] {
            for row in predict_topk(&model, &x, topk).unwrap() {
                assert_eq!(row.len(), topk.min(5));
                let mut s = row.clone();
                s.sort();
                s.dedup();
                assert_eq!(s.len(), row.len());
            }
        }
        assert!(predict_topk(&model, &SparseMatrix::identity(3), 1).is_err());
        assert!(predict_topk(&model, &x, 0).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let truth = one_hot(&[0, 1, 2, 3], 4);
        let perfect = vec![vec![0], vec![1], vec![2], vec![3]];
        let r = evaluate(&perfect, &truth).unwrap();
        assert_eq!((r.test_error, r.precision_at_1, r.n_eval), (0.0, 1.0, 4));
        let half = vec![vec![0], vec![0], vec![2], vec![0]];
        assert_eq!(evaluate(&half, &truth).unwrap().test_error, 0.5);

        let multi = SparseMatrix::from_rows(8, &[vec![(3, 1.0), (7, 1.0)]]).unwrap();
        assert_eq!(evaluate(&[vec![7, 1]], &multi).unwrap().precision_at_1, 1.0);
        assert!(evaluate(&[vec![7]], &truth).is_err());
    }

    #[test]
    fn empty_truth_rows_are_excluded() {
        let truth = SparseMatrix::from_rows(3, &[vec![(1, 1.0)], vec![]]).unwrap();
        let r = evaluate(&[vec![1], vec![0]], &truth).unwrap();
        assert_eq!((r.n_eval, r.n_excluded, r.precision_at_1), (1, 1, 1.0));
        let none = SparseMatrix::from_rows(3, &[vec![]]).unwrap();
        assert!(evaluate(&[vec![0]], &none).is_err());
    }

    #[test]
    fn model_invariants_enforced() {
        let z = DenseMatrix::zeros(3, 2);
        let v = DenseMatrix::zeros(4, 2);
        assert!(TrainedModel::new(ModelKind::IndependentLogistic, z.clone(), v.clone(), None).is_err());
        assert!(TrainedModel::new(
            ModelKind::InnerProduct,
            z.clone(),
            v.clone(),
            Some(DenseMatrix::zeros(4, 3))
        )
        .is_err());
        assert!(TrainedModel::new(
            ModelKind::IndependentLogistic,
            z.clone(),
            v.clone(),
            Some(DenseMatrix::zeros(4, 2))
        )
        .is_err());
        assert!(TrainedModel::new(ModelKind::InnerProduct, z, DenseMatrix::zeros(4, 1), None).is_err());
        assert!(TrainedModel::new(
            ModelKind::InnerProduct,
            DenseMatrix::zeros(3, 0),
            DenseMatrix::zeros(4, 0),
            None
        )
        .is_err());
    }

    fn separable_toy() -> (TrainedModel, DenseMatrix, SparseMatrix) {
        // label 0 iff r > 0, label 1 otherwise; margin 0.5
        let r: Vec<f64> = (0..20)
            .map(|i| if i % 2 == 0 { 0.5 + i as f64 / 20.0 } else { -0.5 - i as f64 / 20.0 })
            .collect();
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let repr = DenseMatrix::from_col_major(20, 1, r).unwrap();
        let base = TrainedModel::new(
            ModelKind::InnerProduct,
            DenseMatrix::from_col_major(1, 1, vec![1.0]).unwrap(),
            DenseMatrix::from_col_major(2, 1, vec![1.0, -1.0]).unwrap(),
            None,
        )
        .unwrap();
        (base, repr, one_hot(&labels, 2))
    }

    #[test]
    fn logistic_separates_toy_within_fifty_epochs() {
        let (base, repr, y) = separable_toy();
        let cfg = LogisticConfig { epochs: 50, lr: 0.5, seed: 3 };
        let fit = train_independent_logistic_traced(&base, &repr, &y, &cfg).unwrap();
        // the representation is the input itself since Z = [1]
        let x = SparseMatrix::from_dense(&repr);
        let pred = predict_topk(&fit.model, &x, 1).unwrap();
        assert_eq!(evaluate(&pred, &y).unwrap().precision_at_1, 1.0);
        let tail = &fit.epoch_loss[fit.epoch_loss.len() - 6..];
        let mean_step: f64 = tail.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / 5.0;
        assert!(mean_step <= 0.0, "loss rose on average: {tail:?}");
    }

    #[test]
    fn logistic_is_deterministic() {
        let (base, repr, y) = separable_toy();
        let cfg = LogisticConfig { epochs: 5, lr: 0.3, seed: 11 };
        let a = train_independent_logistic(&base, &repr, &y, &cfg).unwrap();
        let b = train_independent_logistic(&base, &repr, &y, &cfg).unwrap();
        let bits = |m: &TrainedModel| m.heads().unwrap().as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn all_negative_label_stays_below_half() {
        let (_, repr, _) = separable_toy();
        let y = one_hot(&vec![0; 20], 2);
        let base = TrainedModel::new(
            ModelKind::InnerProduct,
            DenseMatrix::from_col_major(1, 1, vec![1.0]).unwrap(),
            DenseMatrix::zeros(2, 1),
            None,
        )
        .unwrap();
        let m = train_independent_logistic(&base, &repr, &y, &LogisticConfig::default()).unwrap();
        let h = m.heads().unwrap();
        assert_eq!(h.get(1, 0), 0.0);
        for i in 0..20 {
            assert!(sigmoid(h.get(1, 0) * repr.get(i, 0) + h.get(1, 1)) < 0.5);
        }
        let empty = SparseMatrix::from_rows(2, &vec![vec![]; 20]).unwrap();
        assert!(train_independent_logistic(&base, &repr, &empty, &LogisticConfig::default()).is_err());
    }

    #[test]
    fn planted_rank_decoder_fits_training_labels() {
        let (train, _) = make_synthetic(&SynthSpec {
            seed: 2,
            ..SynthSpec::new(625, 20, 10, 3)
        })
        .unwrap();
        let solver = SolverConfig::default();
        let cfg = EmbedConfig { seed: 1, q: 3, ..EmbedConfig::new(3) };
        let emb = rembrandt_embed(&train, &cfg).unwrap();
        let model = train_inner_product(&train, &emb, &solver).unwrap();
        let pred = predict_topk(&model, train.x(), 1).unwrap();
        let err = evaluate(&pred, train.y()).unwrap().test_error;
        let cs = cs_embed(10, 3, 1).unwrap();
        let cs_model = train_inner_product(&train, &cs, &solver).unwrap();
        let cs_err = evaluate(&predict_topk(&cs_model, train.x(), 1).unwrap(), train.y())
            .unwrap()
            .test_error;
        // a least-squares decoder of one-hot labels is not argmax-consistent,
        // so it does not reach zero error; it must still beat a random embedding
        assert!(err < 0.5 * cs_err, "RE {err} vs CS {cs_err}");
    }

    #[test]
    fn planted_factors_decode_noiseless_labels_exactly() {
        let spec = SynthSpec { seed: 2, ..SynthSpec::new(625, 20, 10, 3) };
        let (train, test, planted) = make_synthetic_with_truth(&spec).unwrap();
        let model = TrainedModel::new(ModelKind::InnerProduct, planted.a, planted.b, None).unwrap();
        for data in [&train, &test] {
            let pred = predict_topk(&model, data.x(), 1).unwrap();
            assert_eq!(evaluate(&pred, data.y()).unwrap().test_error, 0.0);
        }
    }
}
