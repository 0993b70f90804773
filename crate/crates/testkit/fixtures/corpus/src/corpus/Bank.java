package corpus;

public class Bank {
    static class InsufficientFunds extends RuntimeException {
        InsufficientFunds(long need) {
            super("need " + need);
        }
    }

    static class Account {
        private final String id;
        private long balance;
        private final long overdraft;

        Account(String id, long overdraft) {
            this.id = id;
            this.overdraft = overdraft;
        }

        void deposit(long amt) {
            if (amt <= 0) throw new IllegalArgumentException("amount");
            balance += amt;
        }

        void withdraw(long amt) {
            if (balance - amt < -overdraft) {
                throw new InsufficientFunds(amt - balance - overdraft);
            }
            balance -= amt;
        }

        long getBalance() {
            return balance;
        }

        String getId() {
            return id;
        }
    }

    static class Savings extends Account {
        private final int rateBps;

        Savings(String id, int rateBps) {
            super(id, 0);
            this.rateBps = rateBps;
        }

        void accrue() {
            long interest = getBalance() * rateBps / 10000;
            if (interest > 0) deposit(interest);
        }
    }

    static boolean transfer(Account from, Account to, long amt) {
        try {
            from.withdraw(amt);
        } catch (InsufficientFunds e) {
            return false;
        }
        to.deposit(amt);
        return true;
    }
}
