# Tests package for QMeasure
