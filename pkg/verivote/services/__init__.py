"""
Protocol parties and the post-election pipeline.
"""
