# Multi-tree Carleson lab package
