"""Code-translation metrics: tokenizers, subset parser, dataflow and CodeBLEU."""
from .ast import OPAQUE, AstNode, parse_subset
from .dataflow import DataflowGraph, build_dataflow, dataflow_match
from .lexer import CodeToken, LexError, detokenize, keywords, tokenize
from .metric import (CodeBleuResult, ast_match, codebleu, codebleu_corpus, combine, ngram_match,
                     weighted_ngram_match)

__all__ = [
    "OPAQUE", "AstNode", "parse_subset",
    "DataflowGraph", "build_dataflow", "dataflow_match",
    "CodeToken", "LexError", "detokenize", "keywords", "tokenize",
    "CodeBleuResult", "ast_match", "codebleu", "codebleu_corpus", "combine", "ngram_match",
    "weighted_ngram_match",
]
