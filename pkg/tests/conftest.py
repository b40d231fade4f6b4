import numpy as np
import pytest

from jpegqt.codec import EncodeParams, encode
from jpegqt.fixtures import synth_image
from jpegqt.qtables import CHROMINANCE, LUMINANCE, standard_table


@pytest.fixture
def gray_gradient():
    h, w = 48, 64
    col = np.linspace(0, 255, w).astype(np.uint8)
    return np.repeat(col[None, :], h, axis=0)


@pytest.fixture
def doc_image():
    return synth_image(96, 96, seed=31337, color=False)


@pytest.fixture
def doc_color():
    return synth_image(80, 72, seed=4242, color=True)


def encode_std(img, quality, subsampling="444", restart_interval=0):
    return encode(img, EncodeParams(
        luminance=standard_table(quality, LUMINANCE),
        chrominance=standard_table(quality, CHROMINANCE),
        subsampling=subsampling,
        restart_interval=restart_interval,
    ))


def rank_auc(scores, labels):
    """Mann-Whitney AUC with midranks; the brute-force threshold-sweep oracle
    in test_acceptance cross-checks it."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    ranks[order] = np.arange(1, len(scores) + 1)
    s = scores[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        if j > i:
            ranks[order[i:j + 1]] = (i + 1 + j + 1) / 2
        i = j + 1
    npos = labels.sum()
    nneg = labels.size - npos
    return (ranks[labels].sum() - npos * (npos + 1) / 2) / (npos * nneg)
