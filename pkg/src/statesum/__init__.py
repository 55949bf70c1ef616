"""Extract-then-compress summarization driven by a running summary state."""
from .corpus import Document, Summary, lead_baseline, load_corpus
from .estimator import OracleLabeler, SummaryStateLabeler
from .evaluation import EvalReport, compare, evaluate
from .model import ModelConfig
from .oracle import OracleLabels, bow_oracle, compressive_oracle, extractive_oracle
from .rouge import OverlapState, rouge_all, rouge_l, rouge_n

__version__ = "0.1.0"

__all__ = [
    "Document", "EvalReport", "ModelConfig", "OracleLabeler", "OracleLabels", "OverlapState",
    "Summary", "SummaryStateLabeler", "bow_oracle", "compare", "compressive_oracle", "evaluate",
    "extractive_oracle", "lead_baseline", "load_corpus", "rouge_all", "rouge_l", "rouge_n",
]
