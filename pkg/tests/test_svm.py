import numpy as np
import pytest

from gaitlock.errors import (
    DimensionMismatch,
    FormatError,
    NonFinite,
    SingleClass,
    TooFewClasses,
    VersionMismatch,
)
from gaitlock.svm import (
    KernelSpec,
    kernel_eval,
    kkt_violation,
    load_model,
    predict,
    predict_many,
    save_model,
    train_binary,
    train_multiclass,
)

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = ["a", "a", "b", "b"]


def two_clusters(n_per=10, gap=6.0, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 0.7, size=(n_per, 2))
    b = rng.normal(gap, 0.7, size=(n_per, 2))
    x = np.vstack([a, b])
    y = np.array([-1.0] * n_per + [1.0] * n_per)
    return x, y


class TestKernels:
    def test_linear(self):
        assert kernel_eval(KernelSpec("linear", 1.0), (1, 2), (3, 4)) == 11.0

    def test_polynomial(self):
        spec = KernelSpec("poly", 1.0, degree=2)
        assert kernel_eval(spec, (1, 0), (1, 0)) == 4.0  # (1 + 1)^2

    def test_rbf_at_zero_distance(self):
        spec = KernelSpec("rbf", 1.0, sigma=2.0)
        rng = np.random.default_rng(1)
        for _ in range(5):
            x = rng.normal(size=7)
            assert kernel_eval(spec, x, x) == pytest.approx(1.0)

    def test_rbf_formula(self):
        spec = KernelSpec("rbf", 1.0, sigma=0.5)
        got = kernel_eval(spec, (0.0, 0.0), (1.0, 1.0))
        assert got == pytest.approx(np.exp(-2.0 / (2 * 0.25)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kernel_eval(KernelSpec("linear", 1.0), (1, 2), (1, 2, 3))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            KernelSpec("linear", 0.0)
        with pytest.raises(ValueError):
            KernelSpec("poly", 1.0)  # degree missing
        with pytest.raises(ValueError):
            KernelSpec("rbf", 1.0)  # sigma missing
        with pytest.raises(ValueError):
            KernelSpec("linear", 1.0, sigma=2.0)
        with pytest.raises(ValueError):
            KernelSpec("sigmoid", 1.0)


class TestTrainBinary:
    def test_two_point_analytic_max_margin(self):
        machine = train_binary(
            np.array([[0.0], [2.0]]), np.array([-1.0, 1.0]), KernelSpec("linear", 1e6)
        )
        assert machine.decision([1.0]) == pytest.approx(0.0, abs=1e-6)
        assert machine.decision([0.0]) == pytest.approx(-1.0, abs=1e-3)
        assert machine.decision([2.0]) == pytest.approx(1.0, abs=1e-3)

    def test_separable_clusters_reach_full_accuracy(self):
        x, y = two_clusters()
        machine = train_binary(x, y, KernelSpec("linear", 10.0))
        predictions = np.sign(machine.decision_many(x))
        assert (predictions == y).all()

    def test_duplicate_point_with_both_labels(self):
        x = np.array([[1.0, 1.0], [1.0, 1.0]])
        y = np.array([1.0, -1.0])
        machine = train_binary(x, y, KernelSpec("linear", 5.0))
        # the conflicting pair is absorbed at the box bound, KKT-feasibly
        assert kkt_violation(machine, x, y) <= 1e-3
        assert np.all(np.abs(machine.coefficients) <= 5.0 + 1e-9)

    def test_kkt_and_dual_constraints_on_random_problems(self):
        rng = np.random.default_rng(5)
        for kind in ("linear", "rbf", "poly"):
            for _ in range(4):
                n = int(rng.integers(6, 20))
                x = rng.normal(0, 2, size=(n, 3))
                y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
                if np.unique(y).size < 2:
                    y[0] = -y[0]
                if kind == "rbf":
                    spec = KernelSpec(kind, 3.0, sigma=1.5)
                elif kind == "poly":
                    spec = KernelSpec(kind, 3.0, degree=2)
                else:
                    spec = KernelSpec(kind, 3.0)
                machine = train_binary(x, y, spec)
                assert kkt_violation(machine, x, y) <= 1e-3 + 1e-9
                assert abs(machine.coefficients.sum()) <= 1e-6
                assert np.all(np.abs(machine.coefficients) <= 3.0 + 1e-6)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClass):
            train_binary(np.zeros((3, 2)), np.ones(3), KernelSpec("linear", 1.0))

    def test_non_finite_rejected(self):
        x = np.array([[0.0, np.nan], [1.0, 1.0]])
        with pytest.raises(NonFinite):
            train_binary(x, np.array([-1.0, 1.0]), KernelSpec("linear", 1.0))


class TestMulticlass:
    def test_three_classes_make_three_machines(self):
        x = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [5.1, 0.0], [0.0, 5.0], [0.1, 5.0]])
        labels = ["a", "a", "b", "b", "c", "c"]
        model = train_multiclass(x, labels, KernelSpec("linear", 10.0))
        assert len(model.binaries) == 3
        assert model.classes == ["a", "b", "c"]

    def test_twenty_classes_make_190_machines(self):
        rng = np.random.default_rng(0)
        centers = rng.normal(0, 50, size=(20, 2))
        x = np.repeat(centers, 2, axis=0) + rng.normal(0, 0.1, size=(40, 2))
        labels = [f"s{i:02d}" for i in range(20) for _ in range(2)]
        model = train_multiclass(x, labels, KernelSpec("linear", 10.0))
        assert len(model.binaries) == 20 * 19 // 2

    def test_one_class_rejected(self):
        with pytest.raises(TooFewClasses):
            train_multiclass(np.zeros((3, 2)), ["a", "a", "a"], KernelSpec("linear", 1.0))

    def test_training_set_consistency_on_separable_data(self):
        rng = np.random.default_rng(3)
        centers = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])
        x = np.vstack([c + rng.normal(0, 0.4, size=(5, 2)) for c in centers])
        labels = [c for c in "abc" for _ in range(5)]
        model = train_multiclass(x, labels, KernelSpec("rbf", 10.0, sigma=2.0))
        assert predict_many(model, x) == labels

    def test_two_class_vote_equals_decision_sign(self):
        x, y = two_clusters(n_per=6)
        labels = ["neg" if v < 0 else "pos" for v in y]
        model = train_multiclass(x, labels, KernelSpec("linear", 10.0))
        (machine,) = model.binaries
        for row in x:
            d = machine.decision(model.normalize(row))
            expected = machine.class_pair[0] if d >= 0 else machine.class_pair[1]
            assert predict(model, row) == expected

    def test_xor_needs_a_nonlinear_kernel(self):
        linear = train_multiclass(XOR_X, XOR_Y, KernelSpec("linear", 10.0))
        linear_acc = np.mean([predict(linear, r) == t for r, t in zip(XOR_X, XOR_Y)])
        rbf = train_multiclass(XOR_X, XOR_Y, KernelSpec("rbf", 10.0, sigma=0.5))
        rbf_acc = np.mean([predict(rbf, r) == t for r, t in zip(XOR_X, XOR_Y)])
        assert linear_acc <= 0.75
        assert rbf_acc == 1.0

    def test_prediction_invariant_under_feature_rescaling(self):
        rng = np.random.default_rng(7)
        x = rng.normal(0, 2, size=(18, 4))
        labels = [("a", "b", "c")[i % 3] for i in range(18)]
        probes = rng.normal(0, 2, size=(10, 4))
        base = train_multiclass(x, labels, KernelSpec("rbf", 5.0, sigma=1.0))
        scaled_x, scaled_probes = x.copy(), probes.copy()
        scaled_x[:, 2] *= 37.5
        scaled_probes[:, 2] *= 37.5
        scaled = train_multiclass(scaled_x, labels, KernelSpec("rbf", 5.0, sigma=1.0))
        assert predict_many(base, probes) == predict_many(scaled, scaled_probes)

    def test_zero_variance_dimension_passes_unscaled(self):
        x = np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0], [4.0, 7.0]])
        model = train_multiclass(x, ["a", "a", "b", "b"], KernelSpec("linear", 1.0))
        assert model.norm_std[1] == 1.0

    def test_larger_c_does_not_hurt_separable_training_accuracy(self):
        x, y = two_clusters(n_per=8, gap=5.0, seed=2)
        labels = ["n" if v < 0 else "p" for v in y]
        accs = []
        for c in (0.1, 1.0, 10.0, 100.0):
            model = train_multiclass(x, labels, KernelSpec("linear", c))
            accs.append(np.mean([predict(model, r) == t for r, t in zip(x, labels)]))
        assert all(b >= a for a, b in zip(accs, accs[1:]))
        assert accs[-1] == 1.0


class TestPersistence:
    def _model(self):
        rng = np.random.default_rng(4)
        x = np.vstack([
            rng.normal(0, 1, size=(6, 5)),
            rng.normal(6, 1, size=(6, 5)),
            rng.normal(-6, 1, size=(6, 5)),
        ])
        labels = [c for c in "abc" for _ in range(6)]
        return train_multiclass(x, labels, KernelSpec("rbf", 10.0, sigma=2.0))

    def test_round_trip_reproduces_predictions(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.svm"
        save_model(model, path)
        back = load_model(path)
        rng = np.random.default_rng(10)
        probes = rng.normal(0, 5, size=(100, 5))
        assert predict_many(model, probes) == predict_many(back, probes)
        for a, b in zip(model.binaries, back.binaries):
            assert a.bias == b.bias
            assert np.array_equal(a.coefficients, b.coefficients)
            assert np.array_equal(a.support_vectors, b.support_vectors)

    def test_truncated_file(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.svm"
        save_model(model, path)
        text = path.read_text()
        (tmp_path / "cut.svm").write_text(text[: len(text) // 2])
        with pytest.raises(FormatError):
            load_model(tmp_path / "cut.svm")

    def test_unknown_version(self, tmp_path):
        path = tmp_path / "future.svm"
        path.write_text("GAITLOCK-SVM v9\nclasses 0\n")
        with pytest.raises(VersionMismatch):
            load_model(path)

    def test_foreign_file(self, tmp_path):
        path = tmp_path / "noise.svm"
        path.write_text("hello world\n")
        with pytest.raises(FormatError):
            load_model(path)


def test_predict_dimension_mismatch():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 3.0], [4.0, 4.0]])
    model = train_multiclass(x, ["a", "a", "b", "b"], KernelSpec("linear", 1.0))
    with pytest.raises(DimensionMismatch):
        predict(model, [1.0, 2.0, 3.0])
