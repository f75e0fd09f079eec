"""maskscore: instance-mask confidence calibration via a learned mask-IoU
regressor, evaluated COCO-style on a synthetic detection benchmark.

The final confidence of an instance hypothesis is the product of its
classification score and a predicted mask IoU, which re-ranks hypotheses by
actual mask quality instead of classification confidence alone.
"""

__version__ = "0.1.0"
