//! GKLS generators and Lipschitz generator paths `t ↦ 𝓛ₜ`.

use serde::{Deserialize, Serialize};

use crate::codec::{MatrixJson, MAX_INPUT_DIM};
use crate::error::{Error, Result};
use crate::superop::{
    c, classify_map, expm_superop, hermitian_deviation, CMatrix, MatrixOperator, SuperOp, HERMITIAN_TOL,
};

/// Tolerance for `vec(𝟙)†·𝓛 = 0`, relative to `max(1, σ_max(𝓛))`.
pub const TRACE_ANNIHILATION_TOL: f64 = 1e-10;

/// Superoperator of `ρ ↦ −i[H,ρ] + Σₖ (VₖρVₖ† − ½{Vₖ†Vₖ, ρ})`.
pub fn build_generator(h: &MatrixOperator, jumps: &[MatrixOperator]) -> Result<SuperOp> {
    let d = h.dim();
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { field: "hamiltonian".into(), deviation: dev });
    }
    let id = CMatrix::identity(d, d);
    let hm = h.matrix();
    let mut mat = (id.kronecker(hm) - hm.transpose().kronecker(&id)) * c(0.0, -1.0);
    for v in jumps {
        if v.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
        }
        let vm = v.matrix();
        let vdv = vm.adjoint() * vm;
        mat += vm.conjugate().kronecker(vm);
        mat -= (id.kronecker(&vdv) + vdv.transpose().kronecker(&id)).scale(0.5);
    }
    SuperOp::new(d, mat)
}

/// Sampled test for being the generator of a semigroup of channels: the
/// trace functional is annihilated and `e^{sA}` is completely positive
/// for `s ∈ {0.1, 0.5, 1}`. Sufficient evidence, not a proof.
pub fn check_generator(a: &SuperOp, tol: f64) -> bool {
    if a.trace_image_norm() > tol {
        return false;
    }
    [0.1, 0.5, 1.0].iter().all(|&s| match expm_superop(a, s) {
        Ok(e) => classify_map(&e, tol).cp,
        Err(_) => false,
    })
}

/// GKLS data together with its materialized superoperator.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: MatrixOperator,
    jumps: Vec<MatrixOperator>,
    superop: SuperOp,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: MatrixOperator, jumps: Vec<MatrixOperator>) -> Result<Self> {
        let superop = build_generator(&hamiltonian, &jumps)?;
        let scale = superop.proxy_norm().max(1.0);
        let defect = superop.trace_image_norm();
        if defect > TRACE_ANNIHILATION_TOL * scale {
            return Err(Error::NotGenerator(format!("trace not annihilated (defect {defect:.3e})")));
        }
        Ok(Self { hamiltonian, jumps, superop })
    }

    /// The zero generator on a `d`-dimensional space.
    pub fn zero(d: usize) -> Self {
        Self { hamiltonian: MatrixOperator::zeros(d), jumps: Vec::new(), superop: SuperOp::zeros(d) }
    }

    /// `(1 − a)·g0 + a·g1` for `a ∈ [0, 1]`. The GKLS data of the mixture is
    /// the mixed Hamiltonian plus both jump sets scaled by `√(1−a)` and `√a`.
    /// The superoperator is the same convex combination of the two inputs.
    pub fn mix(g0: &Self, g1: &Self, a: f64) -> Self {
        let w0 = 1.0 - a;
        let h = MatrixOperator::new(g0.hamiltonian.matrix().scale(w0) + g1.hamiltonian.matrix().scale(a))
            .expect("convex combination of finite operators");
        let mut jumps = Vec::new();
        if w0 > 0.0 {
            jumps.extend(g0.jumps.iter().map(|v| scaled(v, w0.sqrt())));
        }
        if a > 0.0 {
            jumps.extend(g1.jumps.iter().map(|v| scaled(v, a.sqrt())));
        }
        let superop = &g0.superop.scale(w0) + &g1.superop.scale(a);
        Self { hamiltonian: h, jumps, superop }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &MatrixOperator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[MatrixOperator] {
        &self.jumps
    }

    pub fn superop(&self) -> &SuperOp {
        &self.superop
    }

    pub(crate) fn from_json(json: &GeneratorJson, d: usize, field: &str) -> Result<Self> {
        let h = json.hamiltonian.to_square(&format!("{field}hamiltonian"), Some(d))?;
        let dev = hermitian_deviation(&h);
        if dev > HERMITIAN_TOL {
            return Err(Error::invariant(
                format!("{field}hamiltonian"),
                format!("not Hermitian (max deviation {dev:.3e})"),
            ));
        }
        let jumps = json
            .jumps
            .iter()
            .enumerate()
            .map(|(k, j)| MatrixOperator::new(j.to_square(&format!("{field}jumps[{k}]"), Some(d))?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(MatrixOperator::new(h)?, jumps)
            .map_err(|e| Error::invariant(format!("{field}generator"), e.to_string()))
    }

    pub(crate) fn to_json(&self) -> GeneratorJson {
        GeneratorJson {
            hamiltonian: MatrixJson::from_matrix(self.hamiltonian.matrix()),
            jumps: self.jumps.iter().map(|j| MatrixJson::from_matrix(j.matrix())).collect(),
        }
    }
}

fn scaled(v: &MatrixOperator, s: f64) -> MatrixOperator {
    MatrixOperator::new(v.matrix().scale(s)).expect("scaling keeps entries finite")
}

/// Time-independent GKLS data in JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub hamiltonian: MatrixJson,
    #[serde(default)]
    pub jumps: Vec<MatrixJson>,
}

#[derive(Clone, Debug)]
pub struct Keyframe {
    pub t: f64,
    pub generator: LindbladGenerator,
}

/// Piecewise-linear interpolation of GKLS generators between keyframes on
/// `[0, τ]`. Convex combinations of GKLS generators are GKLS, so every
/// intermediate value is again a valid generator.
#[derive(Clone, Debug)]
pub struct GeneratorPath {
    dim: usize,
    horizon: f64,
    keyframes: Vec<Keyframe>,
    lipschitz_bound: f64,
}

/// Upper estimate `√d·σ_max` of the trace-norm operator norm.
fn norm_upper(s: &SuperOp) -> f64 {
    (s.dim() as f64).sqrt() * s.proxy_norm()
}

impl GeneratorPath {
    /// Keyframe times must start at 0 and increase strictly; the last time
    /// is the horizon.
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self> {
        if keyframes.len() < 2 {
            return Err(Error::InvalidPath("at least two keyframes are required".into()));
        }
        let dim = keyframes[0].generator.dim();
        if keyframes[0].t != 0.0 {
            return Err(Error::InvalidPath(format!("first keyframe at t = {} instead of 0", keyframes[0].t)));
        }
        for (k, pair) in keyframes.windows(2).enumerate() {
            if !(pair[1].t > pair[0].t) || !pair[1].t.is_finite() {
                return Err(Error::InvalidPath(format!("keyframe times not strictly increasing at index {}", k + 1)));
            }
        }
        if let Some(bad) = keyframes.iter().find(|k| k.generator.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.generator.dim() });
        }
        let horizon = keyframes.last().unwrap().t;
        let lipschitz_bound = keyframes
            .windows(2)
            .map(|w| norm_upper(&(w[1].generator.superop() - w[0].generator.superop())) / (w[1].t - w[0].t))
            .fold(0.0, f64::max);
        Ok(Self { dim, horizon, keyframes, lipschitz_bound })
    }

    /// `𝓛ₜ ≡ g` on `[0, τ]`.
    pub fn constant(g: LindbladGenerator, horizon: f64) -> Result<Self> {
        Self::linear(g.clone(), g, horizon)
    }

    /// Straight line from `g0` at `t = 0` to `g1` at `t = τ`.
    pub fn linear(g0: LindbladGenerator, g1: LindbladGenerator, horizon: f64) -> Result<Self> {
        Self::new(vec![Keyframe { t: 0.0, generator: g0 }, Keyframe { t: horizon, generator: g1 }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    /// Replaces the certified Lipschitz constant by a larger one.
    pub(crate) fn with_lipschitz_bound(mut self, bound: f64) -> Self {
        self.lipschitz_bound = self.lipschitz_bound.max(bound);
        self
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfRange(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }

    /// Index `j` of the segment `[t_j, t_{j+1}]` containing `t` and the
    /// interpolation weight of the right end.
    fn locate(&self, t: f64) -> (usize, f64) {
        let j = self.keyframes.partition_point(|k| k.t <= t).saturating_sub(1).min(self.keyframes.len() - 2);
        let (t0, t1) = (self.keyframes[j].t, self.keyframes[j + 1].t);
        (j, (t - t0) / (t1 - t0))
    }

    /// `𝓛ₜ` as GKLS data.
    pub fn generator_at(&self, t: f64) -> Result<LindbladGenerator> {
        self.check_time(t)?;
        if let Some(k) = self.keyframes.iter().find(|k| k.t == t) {
            return Ok(k.generator.clone());
        }
        let (j, a) = self.locate(t);
        Ok(LindbladGenerator::mix(&self.keyframes[j].generator, &self.keyframes[j + 1].generator, a))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> SuperOp {
        let t = t.clamp(0.0, self.horizon);
        let (j, a) = self.locate(t);
        if a == 0.0 {
            return self.keyframes[j].generator.superop().clone();
        }
        if a == 1.0 {
            return self.keyframes[j + 1].generator.superop().clone();
        }
        &self.keyframes[j].generator.superop().scale(1.0 - a) + &self.keyframes[j + 1].generator.superop().scale(a)
    }

    pub fn from_json(json: &GeneratorPathJson) -> Result<Self> {
        let d = json.dim;
        if d == 0 || d > MAX_INPUT_DIM {
            return Err(Error::invariant("dim", format!("dimension {d} outside 1..={MAX_INPUT_DIM}")));
        }
        if !(json.horizon > 0.0) || !json.horizon.is_finite() {
            return Err(Error::invariant("horizon", format!("horizon {} must be positive", json.horizon)));
        }
        let keyframes = json
            .keyframes
            .iter()
            .enumerate()
            .map(|(k, kf)| {
                let field = format!("keyframes[{k}].");
                if !kf.t.is_finite() {
                    return Err(Error::invariant(format!("{field}t"), "non-finite time"));
                }
                let generator = LindbladGenerator::from_json(&kf.generator, d, &field)?;
                Ok(Keyframe { t: kf.t, generator })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = Self::new(keyframes).map_err(|e| Error::invariant("keyframes", e.to_string()))?;
        if (path.horizon - json.horizon).abs() > 1e-12 * json.horizon.max(1.0) {
            return Err(Error::invariant(
                "horizon",
                format!("last keyframe at {} but horizon is {}", path.horizon, json.horizon),
            ));
        }
        Ok(path)
    }

    pub fn to_json(&self) -> GeneratorPathJson {
        GeneratorPathJson {
            dim: self.dim,
            horizon: self.horizon,
            keyframes: self
                .keyframes
                .iter()
                .map(|k| KeyframeJson { t: k.t, generator: k.generator.to_json() })
                .collect(),
        }
    }

    /// Parses the JSON path schema.
    pub fn parse(text: &str) -> Result<Self> {
        let json: GeneratorPathJson = serde_json::from_str(text)?;
        Self::from_json(&json)
    }
}

/// `{"dim": d, "horizon": τ, "keyframes": [{"t": …, "hamiltonian": …, "jumps": […]}]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorPathJson {
    pub dim: usize,
    pub horizon: f64,
    pub keyframes: Vec<KeyframeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyframeJson {
    pub t: f64,
    #[serde(flatten)]
    pub generator: GeneratorJson,
}

/// `𝓛ₜ` by linear interpolation of the bracketing keyframes.
pub fn path_eval(path: &GeneratorPath, t: f64) -> Result<SuperOp> {
    path.check_time(t)?;
    Ok(path.eval_unchecked(t))
}

/// Certified Lipschitz constant: for all `s, t`, the upper norm estimate of
/// `𝓛ₜ − 𝓛ₛ` is at most this value times `|t − s|`.
pub fn path_lipschitz(path: &GeneratorPath) -> f64 {
    path.lipschitz_bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::{apply, CVector, ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli(k: usize) -> MatrixOperator {
        let entries = match k {
            0 => [ZERO, ONE, ONE, ZERO],
            1 => [ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO],
            _ => [ONE, ZERO, ZERO, -ONE],
        };
        MatrixOperator::from_rows(2, &entries).unwrap()
    }

    fn random_generator(rng: &mut ChaCha8Rng, d: usize) -> LindbladGenerator {
        let a = CMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = MatrixOperator::new((&a + a.adjoint()).scale(0.5)).unwrap();
        let jumps = (0..2)
            .map(|_| {
                MatrixOperator::new(CMatrix::from_fn(d, d, |_, _| {
                    c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
                }))
                .unwrap()
            })
            .collect();
        LindbladGenerator::new(h, jumps).unwrap()
    }

    #[test]
    fn zero_generator() {
        let g = build_generator(&MatrixOperator::zeros(2), &[]).unwrap();
        assert_eq!(g, SuperOp::zeros(2));
    }

    #[test]
    fn dephasing_generator() {
        let gamma: f64 = 0.3;
        let v = MatrixOperator::new(pauli(2).matrix().scale(gamma.sqrt())).unwrap();
        let g = build_generator(&MatrixOperator::zeros(2), &[v]).unwrap();
        let diag = CVector::from_vec(vec![ZERO, c(-2.0 * gamma, 0.0), c(-2.0 * gamma, 0.0), ZERO]);
        assert!((g.matrix() - CMatrix::from_diagonal(&diag)).norm() < 1e-15);
        // Oracle: act on each basis matrix directly.
        for i in 0..2 {
            for j in 0..2 {
                let e = MatrixOperator::unit(2, i, j);
                let out = apply(&g, &e).unwrap();
                let z = pauli(2).matrix().clone();
                let direct = (&z * e.matrix() * &z - e.matrix()).scale(gamma);
                assert!((out.matrix() - direct).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hamiltonian_part_kills_identity() {
        let g = build_generator(&pauli(0), &[]).unwrap();
        let out = apply(&g, &MatrixOperator::identity(2)).unwrap();
        assert!(out.matrix().norm() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let h = MatrixOperator::from_rows(2, &[ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(build_generator(&h, &[]), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            build_generator(&pauli(0), &[MatrixOperator::identity(3)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn check_generator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..=3 {
            let g = random_generator(&mut rng, d);
            assert!(check_generator(g.superop(), 1e-9));
        }
        assert!(!check_generator(&SuperOp::identity(2), 1e-9));
        let flip = SuperOp::sandwich(pauli(0).matrix(), pauli(0).matrix());
        assert!(check_generator(&(&flip - &SuperOp::identity(2)), 1e-9));
        // −(σx·σx − id) annihilates the trace but is not a generator.
        assert!(!check_generator(&(&SuperOp::identity(2) - &flip), 1e-9));
    }

    #[test]
    fn path_eval_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = random_generator(&mut rng, 2);
        let path = GeneratorPath::linear(LindbladGenerator::zero(2), g.clone(), 2.0).unwrap();
        let mid = path_eval(&path, 1.0).unwrap();
        assert!(mid.distance(&g.superop().scale(0.5)) < 1e-15);
        assert_eq!(&path_eval(&path, 2.0).unwrap(), g.superop());
        assert_eq!(path_eval(&path, 0.0).unwrap(), SuperOp::zeros(2));
        assert!(path_eval(&path, 2.5).is_err());
        assert!(path_eval(&path, -1e-9).is_err());

        let constant = GeneratorPath::constant(g.clone(), 1.0).unwrap();
        for t in [0.0, 0.17, 0.5, 0.99, 1.0] {
            assert!(path_eval(&constant, t).unwrap().distance(g.superop()) < 1e-14);
        }
        assert_eq!(path_lipschitz(&constant), 0.0);
    }

    #[test]
    fn lipschitz_of_single_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_generator(&mut rng, 3);
        let path = GeneratorPath::linear(LindbladGenerator::zero(3), g.clone(), 1.0).unwrap();
        let expected = 3f64.sqrt() * g.superop().proxy_norm();
        assert!((path_lipschitz(&path) - expected).abs() < 1e-12 * expected);

        let mid = LindbladGenerator::mix(&LindbladGenerator::zero(3), &g, 0.5);
        let refined = GeneratorPath::new(vec![
            Keyframe { t: 0.0, generator: LindbladGenerator::zero(3) },
            Keyframe { t: 0.5, generator: mid },
            Keyframe { t: 1.0, generator: g },
        ])
        .unwrap();
        assert!((path_lipschitz(&refined) - path_lipschitz(&path)).abs() < 1e-12);
    }

    #[test]
    fn interpolated_generators_are_valid_and_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let keyframes =
            (0..4).map(|k| Keyframe { t: [0.0, 0.2, 0.7, 1.5][k], generator: random_generator(&mut rng, 2) }).collect();
        let path = GeneratorPath::new(keyframes).unwrap();
        let lip = path_lipschitz(&path);
        for _ in 0..100 {
            let s = rng.random_range(0.0..=1.5);
            let t = rng.random_range(0.0..=1.5);
            let (ls, lt) = (path_eval(&path, s).unwrap(), path_eval(&path, t).unwrap());
            assert!(norm_upper(&(&lt - &ls)) <= lip * (t - s).abs() + 1e-10);
        }
        for t in [0.0, 0.1, 0.45, 1.2] {
            assert!(check_generator(&path_eval(&path, t).unwrap(), 1e-8));
            let data = path.generator_at(t).unwrap();
            let rebuilt = build_generator(data.hamiltonian(), data.jumps()).unwrap();
            assert!(rebuilt.distance(&path_eval(&path, t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn exponentials_are_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = random_generator(&mut rng, 3);
        for t in [0.1, 1.0, 10.0] {
            let class = classify_map(&expm_superop(g.superop(), t).unwrap(), 1e-9);
            assert!(class.cp && class.trace_preserving && class.trace_nonincreasing && class.hermiticity_preserving);
        }
    }

    #[test]
    fn path_validation() {
        let g = LindbladGenerator::zero(2);
        assert!(GeneratorPath::new(vec![Keyframe { t: 0.0, generator: g.clone() }]).is_err());
        let bad_order = vec![
            Keyframe { t: 0.0, generator: g.clone() },
            Keyframe { t: 0.5, generator: g.clone() },
            Keyframe { t: 0.5, generator: g.clone() },
        ];
        assert!(GeneratorPath::new(bad_order).is_err());
        let late_start = vec![Keyframe { t: 0.1, generator: g.clone() }, Keyframe { t: 1.0, generator: g.clone() }];
        assert!(GeneratorPath::new(late_start).is_err());
        let mixed = vec![Keyframe { t: 0.0, generator: g }, Keyframe { t: 1.0, generator: LindbladGenerator::zero(3) }];
        assert!(GeneratorPath::new(mixed).is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{"dim": 2, "horizon": 1.0, "keyframes": [
            {"t": 0.0, "hamiltonian": [[[0,0],[1,0]],[[1,0],[0,0]]], "jumps": [[[[0.5,0],[0,0]],[[0,0],[-0.5,0]]]]},
            {"t": 1.0, "hamiltonian": [[[0,0],[0,-1]],[[0,1],[0,0]]]}
        ]}"#;
        let path = GeneratorPath::parse(text).unwrap();
        assert_eq!(path.keyframes().len(), 2);
        assert_eq!(path.keyframes()[0].generator.jumps().len(), 1);
        let again = GeneratorPath::from_json(&path.to_json()).unwrap();
        assert_eq!(path_eval(&again, 0.3).unwrap(), path_eval(&path, 0.3).unwrap());

        let bad = text.replace("[[0,0],[0,-1]]", "[[0,0],[0,-2]]");
        match GeneratorPath::parse(&bad) {
            Err(Error::Invariant { field, .. }) => assert_eq!(field, "keyframes[1].hamiltonian"),
            other => panic!("unexpected {other:?}"),
        }
        let wrong_horizon = text.replace("\"horizon\": 1.0", "\"horizon\": 2.0");
        assert!(matches!(GeneratorPath::parse(&wrong_horizon), Err(Error::Invariant { .. })));
    }
}
