"""sentistock: OHLCV history + tweet sentiment fused into an LSTM forecaster.

The package is organized along the pipeline:

  market_data  parse and validate OHLCV CSVs and tweet JSONL, align tweets
               onto the trading calendar
  sentiment    lexicon scoring, three-way classification, daily percentages
  features     imputation, train-fitted min-max scaling, feature fusion,
               walk-forward windowing
  lstm         from-scratch LSTM regressor with BPTT, Adam/SGD, checkpoints
  evaluation   MAPE-based accuracy, RMSE, and the two-model comparison
  cli          batch commands (ingest, sentiment, train, predict, compare)
"""

from .errors import PipelineError
from .market_data import (
    BarSeries,
    OhlcvBar,
    Tweet,
    align_to_trading_days,
    parse_ohlcv_csv,
    parse_tweets_jsonl,
)
from .sentiment import (
    DailySentiment,
    Lexicon,
    LexiconEntry,
    SentimentScore,
    aggregate_daily,
    load_lexicon,
    score_corpus,
    score_text,
    tokenize,
)
from .features import (
    FusedDataset,
    ScalerParams,
    WindowedDataset,
    fit_scaler,
    fuse,
    impute_mean,
    inverse_transform,
    make_windows,
    scale_dataset,
    transform,
)
from .lstm import (
    Checkpoint,
    LstmParams,
    LstmState,
    TrainConfig,
    backward,
    cell_forward,
    init_params,
    load_checkpoint,
    predict,
    save_checkpoint,
    sequence_forward,
    train,
)
from .evaluation import (
    EvalReport,
    VariantRecord,
    accuracy,
    mape,
    render_table,
    rmse,
    run_comparison,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineError",
    "BarSeries", "OhlcvBar", "Tweet",
    "align_to_trading_days", "parse_ohlcv_csv", "parse_tweets_jsonl",
    "DailySentiment", "Lexicon", "LexiconEntry", "SentimentScore",
    "aggregate_daily", "load_lexicon", "score_corpus", "score_text", "tokenize",
    "FusedDataset", "ScalerParams", "WindowedDataset",
    "fit_scaler", "fuse", "impute_mean", "inverse_transform",
    "make_windows", "scale_dataset", "transform",
    "Checkpoint", "LstmParams", "LstmState", "TrainConfig",
    "backward", "cell_forward", "init_params", "load_checkpoint",
    "predict", "save_checkpoint", "sequence_forward", "train",
    "EvalReport", "VariantRecord",
    "accuracy", "mape", "render_table", "rmse", "run_comparison",
]
