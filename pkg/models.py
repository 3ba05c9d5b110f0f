from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, UniqueConstraint, func  # Column types
from sqlalchemy.orm import declarative_base, relationship  # Base class and relationships

# Base class for every trial-store table
Base = declarative_base()


class GridRun(Base):
    """One phase-diagram experiment, identified by the hash of its GridSpec"""
    __tablename__ = "grid_runs"
    id = Column(Integer, primary_key=True, index=True)
    spec_hash = Column(String(64), unique=True, index=True, nullable=False)  # sha256 of the GridSpec JSON
    d = Column(Integer, nullable=False)
    sigma2 = Column(Float, nullable=False, default=0.0)
    seed = Column(String, nullable=False)  # unsigned 64-bit, kept as text
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    trials = relationship("TrialRecord", back_populates="run", cascade="all, delete-orphan")


class TrialRecord(Base):
    """Outcome of one algorithm on one paired instance"""
    __tablename__ = "trial_records"
    __table_args__ = (UniqueConstraint("run_id", "m", "n", "algorithm", "trial", name="uq_trial"),)
    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("grid_runs.id"), nullable=False, index=True)
    m = Column(Integer, nullable=False)
    n = Column(Integer, nullable=False)
    algorithm = Column(String, nullable=False)  # descriptor name, e.g. lire5+omp
    trial = Column(Integer, nullable=False)  # trial index k within the cell
    success = Column(Boolean, nullable=False)
    runtime_ms = Column(Float, nullable=False, default=0.0)
    converged = Column(Boolean, nullable=False, default=True)

    run = relationship("GridRun", back_populates="trials")
