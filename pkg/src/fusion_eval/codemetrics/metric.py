"""CodeBLEU: equal-weight mix of n-gram, keyword-weighted n-gram, AST-subtree and dataflow matching."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .ast import AstNode, internal_subtrees, parse_subset
from .dataflow import build_dataflow, dataflow_match
from .lexer import LAYOUT, CodeToken, keywords, tokenize

COMPONENT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
KEYWORD_WEIGHT = 1.0
OTHER_WEIGHT = 0.2
COMPONENTS = ("ngram", "weighted_ngram", "ast", "dataflow")


def _texts(tokens: Iterable[CodeToken | str]) -> list[str]:
    out = []
    for t in tokens:
        text = t.text if isinstance(t, CodeToken) else t
        if text not in LAYOUT:
            out.append(text)
    return out


def _ngrams(seq: Sequence[str], n: int) -> Counter:
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


def _brevity(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1 - ref_len / hyp_len)


def _bleu(hyp: list[str], ref: list[str], max_n: int, weight=None) -> float:
    if not hyp:
        return 0.0
    logs = 0.0
    for n in range(1, max_n + 1):
        h = _ngrams(hyp, n)
        r = _ngrams(ref, n)
        if weight is None:
            num = sum(min(c, r[g]) for g, c in h.items())
            den = sum(h.values())
        else:
            num = sum(weight(g) * min(c, r[g]) for g, c in h.items())
            den = sum(weight(g) * c for g, c in h.items())
        if n >= 2:
            num += 1
            den += 1
        if num == 0:
            return 0.0
        logs += math.log(num / den) / max_n
    return _brevity(len(hyp), len(ref)) * math.exp(logs)


def ngram_match(hyp_tokens, ref_tokens_list, max_n: int = 4) -> float:
    """Smoothed clipped n-gram precision with brevity penalty; best reference wins."""
    hyp = _texts(hyp_tokens)
    return max((_bleu(hyp, _texts(r), max_n) for r in ref_tokens_list), default=0.0)


def token_weight(text: str, language: str) -> float:
    return KEYWORD_WEIGHT if text in keywords(language) else OTHER_WEIGHT


def weighted_ngram_match(hyp_tokens, ref_tokens_list, max_n: int = 4, language: str = "python") -> float:
    """As ``ngram_match`` with each n-gram weighted by the mean weight of its tokens."""
    kw = keywords(language)

    def weight(gram):
        return sum(KEYWORD_WEIGHT if t in kw else OTHER_WEIGHT for t in gram) / len(gram)

    hyp = _texts(hyp_tokens)
    return max((_bleu(hyp, _texts(r), max_n, weight) for r in ref_tokens_list), default=0.0)


def ast_match(hyp_ast: AstNode, ref_ast: AstNode) -> float:
    ref = Counter(internal_subtrees(ref_ast))
    total = sum(ref.values())
    if total == 0:
        return 1.0
    hyp = Counter(internal_subtrees(hyp_ast))
    return sum(min(c, hyp[s]) for s, c in ref.items()) / total


@dataclass(frozen=True)
class CodeBleuResult:
    total: float
    ngram: float
    weighted_ngram: float
    ast: float
    dataflow: float
    reference_index: int = 0

    @property
    def components(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in COMPONENTS}


def combine(components: Sequence[float]) -> float:
    return sum(w * c for w, c in zip(COMPONENT_WEIGHTS, components))


@dataclass(frozen=True)
class _Prepared:
    tokens: list[CodeToken]
    tree: AstNode
    graph: object


def _prepare(source: str, language: str) -> _Prepared:
    tokens = tokenize(source, language)
    tree = parse_subset(tokens, language)
    return _Prepared(tokens, tree, build_dataflow(tree))


def _score_pair(h: _Prepared, r: _Prepared, language: str) -> tuple[float, float, float, float]:
    return (
        ngram_match(h.tokens, [r.tokens]),
        weighted_ngram_match(h.tokens, [r.tokens], language=language),
        ast_match(h.tree, r.tree),
        dataflow_match(h.graph, r.graph),
    )


def codebleu(hyp: str, refs: Sequence[str] | str, language: str = "python") -> CodeBleuResult:
    """Score one hypothesis against its references, keeping the best-scoring reference.

    Raises ``LexError`` if either side fails to tokenize.
    """
    if isinstance(refs, str):
        refs = [refs]
    if not refs:
        raise ValueError("at least one reference is required")
    h = _prepare(hyp, language)
    best = None
    for idx, ref in enumerate(refs):
        comps = _score_pair(h, _prepare(ref, language), language)
        total = combine(comps)
        if best is None or total > best.total:
            best = CodeBleuResult(total, *comps, reference_index=idx)
    return best


def codebleu_corpus(pairs: Iterable[tuple[str, Sequence[str] | str]], language: str = "python") -> float:
    """Arithmetic mean of per-pair scores."""
    scores = [codebleu(h, r, language).total for h, r in pairs]
    if not scores:
        raise ValueError("empty corpus")
    return sum(scores) / len(scores)
