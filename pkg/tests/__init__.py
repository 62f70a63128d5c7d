"""Test package for FairRoute"""
