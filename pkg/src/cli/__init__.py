# Command-line documents, models and rendering
