package bank;

import java.util.ArrayList;
import java.util.List;

public class Bank {
    private final List<Account> accounts = new ArrayList<>();

    static class Account {
        String owner;
        double balance;

        Account(String owner, double balance) {
            this.owner = owner;
            this.balance = balance;
        }
    }

    public void open(String owner, double deposit) {
        if (deposit < 0) {
            throw new IllegalArgumentException("negative deposit {" + deposit + "}");
        }
        accounts.add(new Account(owner, deposit));
    }

    public double total() {
        double sum = 0;
        for (Account a : accounts) {
            sum += a.balance;
        }
        return sum;
    }

    public static void main(String[] args) {
        Bank bank = new Bank();
        int opened = 0;
        for (int i = 0; i < args.length; i++) {
            try {
                bank.open(args[i], 100.0);
                opened++;
            } catch (IllegalArgumentException e) {
                System.err.println(e.getMessage());
            } finally {
                System.out.println("processed " + args[i]);
            }
        }
        System.out.println(opened + " accounts, total " + bank.total());
    }
}
