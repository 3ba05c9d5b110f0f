from typing import Optional  # Optional URL

from dotenv import load_dotenv  # .env support
from sqlalchemy import create_engine  # Database engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker  # Session factory

import models

load_dotenv()

DATABASE_URL_ENV = "LIRE_DATABASE_URL"  # trial store location, unset means no store


def make_engine(url: str) -> Engine:
    """Engine for the trial store; tables are created on first use"""
    # SQLite connections are shared with the worker-result loop
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    engine = create_engine(url, connect_args=connect_args)
    models.Base.metadata.create_all(bind=engine)
    return engine


def make_session_factory(url: Optional[str]) -> Optional[sessionmaker]:
    """Session factory for url, or None when no trial store is configured"""
    if not url:
        return None
    return sessionmaker(autocommit=False, autoflush=False, bind=make_engine(url))
