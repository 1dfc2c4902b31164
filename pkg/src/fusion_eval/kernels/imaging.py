"""HTR preprocessing: aspect-preserving resize onto a padded canvas, and vertical patches."""
from __future__ import annotations

import numpy as np

TARGET_H = 128
TARGET_W = 512
PATCH_W = 8
N_PATCHES = TARGET_W // PATCH_W
PATCH_DIM = TARGET_H * PATCH_W * 3


class ShapeError(ValueError):
    pass


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 3 or img.shape[0] != 3 or img.shape[1] < 1 or img.shape[2] < 1:
        raise ShapeError(f"expected a 3 x H x W image, got shape {img.shape}")
    return img


def _bilinear_axis(src_len: int, dst_len: int):
    """Source indices and weights for half-pixel-centred linear resampling along one axis."""
    scale = src_len / dst_len
    pos = (np.arange(dst_len) + 0.5) * scale - 0.5
    pos = np.clip(pos, 0.0, src_len - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, src_len - 1)
    frac = pos - lo
    return lo, hi, frac


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    img = _check_image(img)
    _, h, w = img.shape
    if (h, w) == (out_h, out_w):
        return img.copy()
    y0, y1, fy = _bilinear_axis(h, out_h)
    x0, x1, fx = _bilinear_axis(w, out_w)
    top = img[:, y0, :] * (1 - fy)[None, :, None] + img[:, y1, :] * fy[None, :, None]
    return top[:, :, x0] * (1 - fx)[None, None, :] + top[:, :, x1] * fx[None, None, :]


def smart_resize(img, target_h: int = TARGET_H, target_w: int = TARGET_W) -> np.ndarray:
    """Scale by ``min(target_h/H, target_w/W)``, place top-left, pad the rest with 0."""
    img = _check_image(img)
    _, h, w = img.shape
    s = min(target_h / h, target_w / w)
    new_h = min(target_h, max(1, int(round(h * s))))
    new_w = min(target_w, max(1, int(round(w * s))))
    out = np.zeros((3, target_h, target_w), dtype=float)
    out[:, :new_h, :new_w] = bilinear_resize(img, new_h, new_w)
    return out


def patchify(img) -> np.ndarray:
    """Split a 3x128x512 image into 64 vertical strips, each flattened to 3072 values.

    Strip ``i`` is columns ``[8i, 8i+8)``; inside a strip values run over height
    first, then width, then channel, i.e. index ``(row * 8 + col) * 3 + channel``.
    """
    img = np.asarray(img)
    if img.shape != (3, TARGET_H, TARGET_W):
        raise ShapeError(f"patchify expects shape (3, {TARGET_H}, {TARGET_W}), got {img.shape}")
    strips = img.reshape(3, TARGET_H, N_PATCHES, PATCH_W)      # c, h, patch, w
    return strips.transpose(2, 1, 3, 0).reshape(N_PATCHES, PATCH_DIM)


def unpatchify(patches) -> np.ndarray:
    patches = np.asarray(patches)
    if patches.shape != (N_PATCHES, PATCH_DIM):
        raise ShapeError(f"unpatchify expects shape ({N_PATCHES}, {PATCH_DIM}), got {patches.shape}")
    return patches.reshape(N_PATCHES, TARGET_H, PATCH_W, 3).transpose(3, 1, 0, 2).reshape(3, TARGET_H, TARGET_W)
