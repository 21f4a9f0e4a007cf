"""Gaze-assisted PET/CT lesion annotation workbench and analysis toolkit."""

__version__ = "0.1.0"
