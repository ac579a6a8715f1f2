# Config package for QMeasure
