use std::collections::VecDeque;

use crate::hash::Digest;
use crate::ledger::{Block, Transaction};

/// Single logical FIFO orderer with a block cutter.
///
/// Blocks are cut when `block_size` transactions are queued, or when the
/// queue is non-empty and `batch_timeout` ticks have passed since the last
/// cut.
#[derive(Debug, Clone)]
pub struct OrderingService {
    block_size: usize,
    batch_timeout: u64,
    queue: VecDeque<Transaction>,
    idle_ticks: u64,
    next_number: u64,
    prev_hash: Digest,
    received: u64,
}

impl OrderingService {
    /// Starts ordering after `genesis`.
    pub fn new(block_size: usize, batch_timeout: u64, genesis: &Block) -> Self {
        assert!(block_size >= 1 && batch_timeout >= 1);
        OrderingService {
            block_size,
            batch_timeout,
            queue: VecDeque::new(),
            idle_ticks: 0,
            next_number: genesis.number() + 1,
            prev_hash: genesis.hash(),
            received: 0,
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn set_block_size(&mut self, block_size: usize) {
        assert!(block_size >= 1);
        self.block_size = block_size;
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Total transactions accepted so far.
    pub fn received(&self) -> u64 {
        self.received
    }

    pub fn broadcast(&mut self, tx: Transaction) -> Vec<Block> {
        self.queue.push_back(tx);
        self.received += 1;
        let mut out = Vec::new();
        while self.queue.len() >= self.block_size {
            out.push(self.cut());
        }
        out
    }

    /// Advances logical time by one tick.
    pub fn tick(&mut self) -> Option<Block> {
        if self.queue.is_empty() {
            self.idle_ticks = 0;
            return None;
        }
        self.idle_ticks += 1;
        (self.idle_ticks >= self.batch_timeout).then(|| self.cut())
    }

    /// Cuts everything queued, as repeated timeouts would.
    pub fn flush(&mut self) -> Vec<Block> {
        let mut out = Vec::new();
        while !self.queue.is_empty() {
            out.push(self.cut());
        }
        out
    }

    fn cut(&mut self) -> Block {
        let n = self.queue.len().min(self.block_size);
        let txs: Vec<Transaction> = self.queue.drain(..n).collect();
        let block = Block::new(self.next_number, self.prev_hash, txs);
        self.next_number += 1;
        self.prev_hash = block.hash();
        self.idle_ticks = 0;
        block
    }
}
