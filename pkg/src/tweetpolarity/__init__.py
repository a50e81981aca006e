"""Neural sentiment classification for short texts.

Pipeline: tweet normalization -> skip-gram embedding pretraining ->
distant fine-tuning on emoticon-labeled tweets -> supervised CNN/BiLSTM
training -> soft-voting ensembles, quantification and subtask metrics.
"""

__version__ = "0.1.0"
