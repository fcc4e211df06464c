import numpy as np


def f1_macro(predicted, truth, class_count):
    """Unweighted mean of per-class F1 over the classes present in ``truth``.

    Classes that never occur in ``truth`` are left out of the mean.
    """
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth differ in length")
    if truth.size == 0:
        raise ValueError("f1_macro of empty input")
    scores = []
    for c in range(class_count):
        in_truth = truth == c
        if not in_truth.any():
            continue
        in_pred = predicted == c
        tp = np.count_nonzero(in_truth & in_pred)
        fp = np.count_nonzero(~in_truth & in_pred)
        fn = np.count_nonzero(in_truth & ~in_pred)
        scores.append(2.0 * tp / (2.0 * tp + fp + fn))
    return float(np.mean(scores))


METRICS = {"f1_macro": f1_macro}
