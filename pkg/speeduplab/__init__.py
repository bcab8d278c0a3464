"""
SpeedupLab

Speedup, parallelizable fraction and exponent of parallelism of parallel
cost models, with asymptotic classification of implementations as
strongly, weakly or Amdahl-like parallel.

Modules:
    expr_core      cost expression parser and evaluator
    amdahl_core    speedup / fraction / exponent conversions
    model_library  cost models, growth functions, model files
    asymptotics    p -> infinity limit estimation
    classifier     parallelism classification
    superlinear    superlinearity conditions and the FFT processor bound
    fitting        least-squares fitting of model constants from timings
    cli            command-line front end
"""

__version__ = "0.1.0"
