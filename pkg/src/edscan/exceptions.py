"""Errors specific to energy-distance change-point analysis."""


class DegenerateScaleError(RuntimeError):
    """The pooled scale estimate is zero, so the scan statistic is undefined.

    This happens exactly when every pairwise distance is zero, i.e. the
    series is constant. A constant series carries no information about a
    distributional change, so the test refuses to produce a decision
    instead of silently reporting a zero statistic.
    """

    def __init__(self, message, max_distance=0.0):
        super().__init__(message)
        self.max_distance = max_distance
