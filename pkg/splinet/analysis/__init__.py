from splinet.analysis.convergence import ConvergenceReport, convergence_study
from splinet.analysis.stability import SpectrumReport, spectrum_scan, stability_spectrum
from splinet.analysis.statistics import SweepStats, summarize, summarize_by
from splinet.analysis.sweep import Sweep, sample_hyperparameters
