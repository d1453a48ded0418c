"""Scikit-learn style wrappers around the flow, fingerprint and signature engines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_conformal_factors, check_surface, check_words
from .fibered import (
    BaseSample,
    fingerprint,
    loop_continuity,
    make_family,
    run_family,
    uniform_envelope,
)
from .flow import FlowConfig, TargetCurvature, run_flow
from .meyer import fibration_signature

__all__ = ["NormalizedRicciFlow", "SpectralFingerprint", "FiberedRicciFlow", "MeyerSignature"]


class _FlowParams:
    def _flow_config(self) -> FlowConfig:
        return FlowConfig(dt_init=self.dt_init, dt_max=self.dt_max, tol=self.tol,
                          t_max=self.t_max, step_rule=self.step_rule,
                          monitor_every=self.monitor_every)


class NormalizedRicciFlow(_FlowParams, TransformerMixin, BaseEstimator):
    """Maps initial conformal factors to the uniformized ones.

    Each row of ``X`` is one initial state over ``surface``; ``transform``
    flows every row and returns the limit factors.  Traces of the last
    call are kept in ``traces_``.
    """

    def __init__(self, surface=None, dt_init=0.05, dt_max=0.25, tol=1e-8, t_max=200.0,
                 step_rule="adaptive", monitor_every=1):
        self.surface = surface
        self.dt_init = dt_init
        self.dt_max = dt_max
        self.tol = tol
        self.t_max = t_max
        self.step_rule = step_rule
        self.monitor_every = monitor_every

    def fit(self, X=None, y=None):
        surface = check_surface(self.surface)
        if X is not None:
            check_conformal_factors(X, surface)
        self._flow_config()
        self.target_ = TargetCurvature.uniform(surface)
        self.n_features_in_ = surface.n_vertices
        return self

    def transform(self, X):
        check_is_fitted(self, "target_")
        X = check_conformal_factors(X, self.surface)
        cfg = self._flow_config()
        out = np.empty_like(X)
        traces = []
        for k, row in enumerate(X):
            state, trace = run_flow(self.surface.state(row), self.target_, cfg)
            out[k] = state.u
            traces.append(trace)
        self.traces_ = traces
        self.rates_ = np.array([t.fitted_rate for t in traces])
        return out


class SpectralFingerprint(TransformerMixin, BaseEstimator):
    """Area-normalized low Laplace spectrum of each conformal state."""

    def __init__(self, surface=None, n_eigenvalues=12):
        self.surface = surface
        self.n_eigenvalues = n_eigenvalues

    def fit(self, X=None, y=None):
        surface = check_surface(self.surface)
        if not 1 <= self.n_eigenvalues <= surface.n_vertices:
            raise ValueError("n_eigenvalues out of range")
        self.n_features_in_ = surface.n_vertices
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_conformal_factors(X, self.surface)
        return np.array([fingerprint(self.surface.state(row), self.n_eigenvalues).spectrum
                         for row in X])


class FiberedRicciFlow(_FlowParams, BaseEstimator):
    """Builds a family over a sampled base, flows it and summarizes uniformity."""

    def __init__(self, surface=None, base_kind="loop", n_points=32, amplitude=0.2,
                 class_amplitude=0.0, seed=0, dt_init=0.05, dt_max=0.25, tol=1e-8,
                 t_max=200.0, step_rule="adaptive", monitor_every=1, n_eigenvalues=12,
                 n_jobs=None):
        self.surface = surface
        self.base_kind = base_kind
        self.n_points = n_points
        self.amplitude = amplitude
        self.class_amplitude = class_amplitude
        self.seed = seed
        self.dt_init = dt_init
        self.dt_max = dt_max
        self.tol = tol
        self.t_max = t_max
        self.step_rule = step_rule
        self.monitor_every = monitor_every
        self.n_eigenvalues = n_eigenvalues
        self.n_jobs = n_jobs

    def _base(self) -> BaseSample:
        if self.base_kind == "loop":
            return BaseSample.loop(self.n_points)
        if self.base_kind == "disk-grid":
            return BaseSample.disk_grid(self.n_points)
        if self.base_kind == "sphere-mesh":
            return BaseSample.sphere_mesh()
        raise ValueError(f"unknown base kind {self.base_kind!r}")

    def fit(self, X=None, y=None):
        surface = check_surface(self.surface)
        family = make_family(surface, self._base(), self.amplitude, self.seed,
                             class_amplitude=self.class_amplitude)
        self.family_ = run_family(family, self._flow_config(), n_jobs=self.n_jobs)
        self.envelope_ = uniform_envelope(self.family_)
        self.continuity_ = (loop_continuity(self.family_, self.n_eigenvalues)
                            if self.base_kind == "loop" else None)
        return self

    def transform(self, X=None):
        """Fingerprints of the limit fibers, one row per base point."""
        check_is_fitted(self, "family_")
        return np.array([fingerprint(s, self.n_eigenvalues).spectrum for s in self.family_.states])


class MeyerSignature(BaseEstimator):
    """``predict`` returns the signature of each monodromy word."""

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def reports(self, words):
        return [fibration_signature(w.space, w) for w in check_words(words)]

    def predict(self, words):
        return np.array([r.sigma for r in self.reports(words)], dtype=int)
