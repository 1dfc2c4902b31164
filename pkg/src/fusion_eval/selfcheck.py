"""Randomised comparison of the numerical kernels with their brute-force oracles."""
from __future__ import annotations

import numpy as np

from .kernels import assign, assignment_cost, ctc_loss, giou, min_frames, patchify, smart_resize, unpatchify
from .kernels.oracles import assignment_enumerate, central_difference, ctc_loss_enumerate, relative_error


def random_log_probs(rng: np.random.Generator, T: int, V: int) -> np.ndarray:
    x = rng.normal(size=(T, V))
    return x - np.logaddexp.reduce(x, axis=1, keepdims=True)


def random_ctc_instance(rng: np.random.Generator, max_t: int = 6, max_v: int = 4, max_l: int = 3):
    while True:
        T = int(rng.integers(1, max_t + 1))
        V = int(rng.integers(2, max_v + 1))
        L = int(rng.integers(0, max_l + 1))
        labels = [int(v) for v in rng.integers(1, V, size=L)]
        if min_frames(labels) <= T:
            return random_log_probs(rng, T, V), labels


def random_box(rng: np.random.Generator, scale: float = 10.0) -> np.ndarray:
    x1, y1 = rng.uniform(0, scale, size=2)
    w, h = rng.uniform(0.05, scale / 2, size=2)
    return np.array([x1, y1, x1 + w, y1 + h])


def check_ctc(rng, trials: int) -> dict:
    worst_loss = worst_grad = 0.0
    for _ in range(trials):
        lp, labels = random_ctc_instance(rng)
        loss, grad = ctc_loss(lp, labels)
        worst_loss = max(worst_loss, abs(loss - ctc_loss_enumerate(lp, labels)) / max(abs(loss), 1e-12))
        num = central_difference(lambda x: ctc_loss(x, labels)[0], lp)
        worst_grad = max(worst_grad, relative_error(grad, num))
    return {"ok": worst_loss <= 1e-9 and worst_grad <= 1e-4, "trials": trials,
            "max_loss_rel_err": worst_loss, "max_grad_rel_err": worst_grad}


def check_assignment(rng, trials: int) -> dict:
    mismatches = 0
    for _ in range(trials):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(m, 7))
        cost = rng.integers(-20, 21, size=(m, n)).astype(float)
        best, _ = assignment_enumerate(cost)
        if assignment_cost(cost, assign(cost)) != best:
            mismatches += 1
    return {"ok": mismatches == 0, "trials": trials, "mismatches": mismatches}


def check_giou(rng, trials: int) -> dict:
    worst = 0.0
    violations = 0
    for _ in range(trials):
        a, b = random_box(rng), random_box(rng)
        val, ga, gb = giou(a, b)
        iw = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
        ih = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
        inter = iw * ih
        iou = inter / ((a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter)
        if val > iou + 1e-12:
            violations += 1
        x = np.concatenate([a, b])
        num = central_difference(lambda v: giou(v[:4], v[4:])[0], x)
        worst = max(worst, relative_error(np.concatenate([ga, gb]), num))
    return {"ok": violations == 0 and worst <= 1e-4, "trials": trials,
            "giou_above_iou": violations, "max_grad_rel_err": worst}


def check_patches(rng, trials: int) -> dict:
    bad = 0
    for _ in range(trials):
        h = int(rng.integers(8, 300))
        w = int(rng.integers(8, 1200))
        img = rng.uniform(0, 1, size=(3, h, w))
        out = smart_resize(img)
        patches = patchify(out)
        if out.shape != (3, 128, 512) or patches.shape != (64, 3072) or \
                not np.array_equal(unpatchify(patches), out):
            bad += 1
    return {"ok": bad == 0, "trials": trials, "failures": bad}


def run_checks(seed: int = 0, trials: int = 50) -> dict[str, dict]:
    rng = np.random.default_rng(seed)
    return {
        "ctc": check_ctc(rng, trials),
        "assignment": check_assignment(rng, trials),
        "giou": check_giou(rng, trials),
        "patches": check_patches(rng, trials),
    }
