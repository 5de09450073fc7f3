"""Time-scaled and averaged gradient flows for convex optimization.

Core pieces: convex problems and cocoercive operators (``problems``),
first- and second-order evolution systems with an RK4 integrator
(``dynamics``), time-scale and averaging transforms (``transforms``),
discrete schemes with step-size bookkeeping (``algorithms``), and rate
diagnostics (``analysis``).  A FastAPI service (``service``) and a thin
CLI client (``cli``) wrap experiment running and verification.
"""

__version__ = "0.1.0"
