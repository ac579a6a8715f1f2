# QMeasure package
