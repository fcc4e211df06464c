"""Pool-based batch active learning benchmark."""
